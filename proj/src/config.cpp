#include "opcalc/config.hpp"

#include "opcalc/arith.hpp"
#include "opcalc/laplace_ops.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace opcalc {

namespace {

enum class Type { number, word, list };

using Schema = std::map<std::string, Type>;

const std::map<std::string, Schema>& schemas()
{
    static const std::map<std::string, Schema> s = [] {
        const Schema common{{"threshold", Type::number}, {"tolerance", Type::number}};
        const Schema sequence{{"C", Type::word}, {"C_values", Type::list}, {"C_extend", Type::word}};
        std::map<std::string, Schema> m;
        m["ode1d"] = {{"P", Type::list}, {"P_im", Type::list}, {"rhs", Type::word}, {"samples", Type::list}};
        m["pde2d"] = {{"Px", Type::list}, {"Py", Type::list}, {"c", Type::word}, {"cx", Type::word},
                      {"cy", Type::word}, {"N", Type::number}, {"samples_x", Type::list},
                      {"samples_y", Type::list}};
        m["evolution"] = {{"equation", Type::word}, {"nu", Type::number}, {"m", Type::number},
                          {"V", Type::word}, {"lower_limit", Type::number}, {"x", Type::list},
                          {"t", Type::list}};
        m["fde"] = {{"operator", Type::word}, {"weights", Type::list}, {"orders", Type::list},
                    {"shifts", Type::list}, {"M", Type::number}, {"samples", Type::list}};
        m["laplace_op"] = {{"mode", Type::word}, {"symbol", Type::word}, {"a", Type::number}, {"P", Type::list},
                           {"g", Type::word}, {"samples", Type::list}};
        m["fourier_reduce"] = {{"a1", Type::number}, {"b1", Type::number}, {"a2", Type::number},
                               {"b2", Type::number}, {"a3", Type::number}, {"b3", Type::number},
                               {"L", Type::number}, {"N", Type::number}, {"manufactured", Type::word}};
        m["identity_check"] = {{"f", Type::word}, {"q", Type::number}};
        for (auto& [kind, schema] : m) {
            schema.insert(common.begin(), common.end());
            if (kind == "ode1d" || kind == "evolution") schema.insert(sequence.begin(), sequence.end());
        }
        return m;
    }();
    return s;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out)
{
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == s.size() && std::isfinite(out);
}

bool is_word(const std::string& s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':' || c == '.';
    });
}

ConfigValue parse_value(const std::string& raw, int line)
{
    const auto where = [&] { return "line " + std::to_string(line) + ": "; };
    if (raw.empty()) throw ConfigError(where() + "missing value");
    if (raw.front() == '[') {
        if (raw.back() != ']') throw ConfigError(where() + "unterminated list");
        std::vector<double> out;
        const std::string body = trim(raw.substr(1, raw.size() - 2));
        if (body.empty()) return out;
        std::stringstream ss(body);
        for (std::string item; std::getline(ss, item, ',');) {
            double v = 0.0;
            if (!parse_double(trim(item), v))
                throw ConfigError(where() + "list entry '" + trim(item) + "' is not a finite number");
            out.push_back(v);
        }
        return out;
    }
    double v = 0.0;
    if (parse_double(raw, v)) return v;
    if (is_word(raw)) return raw;
    throw ConfigError(where() + "cannot parse value '" + raw + "'");
}

const char* type_name(Type t)
{
    switch (t) {
    case Type::number: return "a number";
    case Type::word: return "a word";
    case Type::list: return "a list";
    }
    return "?";
}

bool matches(const ConfigValue& v, Type t)
{
    switch (t) {
    case Type::number: return std::holds_alternative<double>(v);
    case Type::word: return std::holds_alternative<std::string>(v);
    case Type::list: return std::holds_alternative<std::vector<double>>(v);
    }
    return false;
}

const std::map<std::string, std::vector<std::string>>& required_keys()
{
    static const std::map<std::string, std::vector<std::string>> r{
        {"ode1d", {"P", "C"}},
        {"pde2d", {"Px", "Py", "cx", "cy"}},
        {"evolution", {"equation", "C"}},
        {"fde", {"operator"}},
        {"laplace_op", {"symbol", "g"}},
        {"fourier_reduce", {"manufactured"}},
        {"identity_check", {"f", "q"}},
    };
    return r;
}

const std::map<std::string, std::vector<std::string>>& allowed_words()
{
    static const std::map<std::string, std::vector<std::string>> w{
        {"rhs", {"exp", "lambert"}},
        {"C_extend", {"zero", "error"}},
        {"equation", {"evolution", "schrodinger"}},
        {"V", {"zero", "t", "cos"}},
        {"operator", {"derivative", "example1", "cosh", "cos", "cos_pi", "exp_exp", "custom"}},
        {"mode", {"solve", "apply", "round_trip"}},
        {"symbol", {"one", "derivative", "shift", "shift_plus_one", "log1p", "log_example", "poly"}},
        {"manufactured", {"gaussian", "x_gaussian"}},
    };
    return w;
}

bool is_registered(const std::string& name)
{
    const auto& r = sequences::registry_names();
    return std::find(r.begin(), r.end(), name) != r.end();
}

bool is_integer(double v) { return v == std::floor(v) && std::abs(v) < 1e9; }

void validate(const ProblemConfig& c)
{
    const auto& kind = c.kind();
    for (const auto& key : required_keys().at(kind))
        if (!c.has(key)) throw ConfigError("kind " + kind + " requires '" + key + "'");

    for (const auto& [key, value] : c.params()) {
        if (const auto* d = std::get_if<double>(&value)) {
            if ((key == "tolerance" || key == "threshold") && !(*d > 0.0))
                throw ConfigError("'" + key + "' must be positive");
        } else if (const auto* l = std::get_if<std::vector<double>>(&value)) {
            if (l->empty()) throw ConfigError("'" + key + "' must be nonempty");
        } else {
            const auto& w = std::get<std::string>(value);
            if (const auto a = allowed_words().find(key); a != allowed_words().end()) {
                if (std::find(a->second.begin(), a->second.end(), w) == a->second.end())
                    throw ConfigError("'" + key + "' has unknown value '" + w + "'");
            }
        }
    }

    for (const char* key : {"C", "cx", "cy"}) {
        if (!c.has(key)) continue;
        const auto name = c.word(key);
        if (name == "custom" && std::string(key) == "C") {
            if (!c.has("C_values")) throw ConfigError("C = custom requires 'C_values'");
        } else if (!is_registered(name)) {
            throw ConfigError("unknown sequence '" + name + "' for '" + key + "'");
        }
    }
    if (c.has("C_values") && c.word_or("C", "") != "custom")
        throw ConfigError("'C_values' is only used with C = custom");
    if (c.has("C_extend") && !c.has("C_values")) throw ConfigError("'C_extend' requires 'C_values'");

    if (kind == "identity_check") {
        const auto f = c.word("f");
        if (f != "mobius-generator" && f != "phi-generator" && !is_registered(f))
            throw ConfigError("unknown generator '" + f + "'");
        const double q = c.number("q");
        if (!(q > 0.0 && q <= 0.7)) throw ConfigError("'q' must lie in (0, 0.7]");
    }
    if (kind == "evolution") {
        const bool free = c.word("equation") == "evolution";
        const char* order = free ? "nu" : "m";
        if (!c.has(order)) throw ConfigError(std::string("equation requires '") + order + "'");
        const double v = c.number(order);
        if (!(v >= 1.0) || !is_integer(v)) throw ConfigError(std::string("'") + order + "' must be a positive integer");
        for (const char* key : free ? std::vector<const char*>{"m", "V", "lower_limit"}
                                    : std::vector<const char*>{"nu"})
            if (c.has(key)) throw ConfigError(std::string("'") + key + "' does not apply to this equation");
    }
    if (kind == "fde") {
        const bool custom = c.word("operator") == "custom";
        for (const char* key : {"weights", "orders", "shifts"})
            if (c.has(key) != custom)
                throw ConfigError(std::string("'") + key + (custom ? "' is required" : "' needs operator = custom"));
        if (custom) {
            const auto n = c.list("weights").size();
            if (c.list("orders").size() != n || c.list("shifts").size() != n)
                throw ConfigError("'weights', 'orders' and 'shifts' must have equal length");
            for (double o : c.list("orders"))
                if (!(o >= 0.0) || !is_integer(o)) throw ConfigError("'orders' must be non-negative integers");
        }
    }
    if (kind == "laplace_op") {
        const auto sym = c.word("symbol");
        if ((sym == "poly") != c.has("P")) throw ConfigError("'P' goes together with symbol = poly");
        try {
            (void)LaplaceSpec::parse(c.word("g"));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad 'g': ") + e.what());
        }
    }
    if (kind == "fourier_reduce" && c.has("N")) {
        const double n = c.number("N");
        if (!is_integer(n) || n < 8 || (static_cast<std::uint64_t>(n) & (static_cast<std::uint64_t>(n) - 1)) != 0)
            throw ConfigError("'N' must be a power of two >= 8");
    }
    if (kind == "fourier_reduce" && c.has("L") && !(c.number("L") > 0.0)) throw ConfigError("'L' must be positive");
    if (kind == "pde2d" && c.has("N") && (!(c.number("N") >= 1.0) || !is_integer(c.number("N"))))
        throw ConfigError("'N' must be a positive integer");
    if (kind == "fde" && c.has("M") && (!(c.number("M") >= 1.0) || !is_integer(c.number("M"))))
        throw ConfigError("'M' must be a positive integer");
}

}  // namespace

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<std::string>& config_kinds()
{
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : schemas()) k.push_back(name);
        return k;
    }();
    return kinds;
}

ProblemConfig ProblemConfig::parse(const std::string& text)
{
    ProblemConfig cfg;
    std::map<std::string, std::pair<ConfigValue, int>> raw;
    std::istringstream in(text);
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!is_word(key)) throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
        if (raw.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        raw.emplace(key, std::make_pair(parse_value(trim(line.substr(eq + 1)), line_no), line_no));
    }

    const auto k = raw.find("kind");
    if (k == raw.end()) throw ConfigError("missing 'kind'");
    if (!std::holds_alternative<std::string>(k->second.first)) throw ConfigError("'kind' must be a word");
    cfg.kind_ = std::get<std::string>(k->second.first);
    const auto s = schemas().find(cfg.kind_);
    if (s == schemas().end()) throw ConfigError("unknown kind '" + cfg.kind_ + "'");
    raw.erase(k);

    for (auto& [key, vl] : raw) {
        const auto t = s->second.find(key);
        if (t == s->second.end())
            throw ConfigError("line " + std::to_string(vl.second) + ": unknown key '" + key + "' for kind "
                              + cfg.kind_);
        if (!matches(vl.first, t->second))
            throw ConfigError("line " + std::to_string(vl.second) + ": '" + key + "' must be "
                              + type_name(t->second));
        cfg.params_.emplace(key, std::move(vl.first));
    }
    validate(cfg);
    return cfg;
}

ProblemConfig ProblemConfig::load(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

double ProblemConfig::number(const std::string& key) const
{
    const auto it = params_.find(key);
    if (it == params_.end()) throw ConfigError("missing '" + key + "'");
    const auto* v = std::get_if<double>(&it->second);
    if (!v) throw ConfigError("'" + key + "' must be a number");
    return *v;
}

double ProblemConfig::number_or(const std::string& key, double fallback) const
{
    return has(key) ? number(key) : fallback;
}

std::string ProblemConfig::word(const std::string& key) const
{
    const auto it = params_.find(key);
    if (it == params_.end()) throw ConfigError("missing '" + key + "'");
    const auto* v = std::get_if<std::string>(&it->second);
    if (!v) throw ConfigError("'" + key + "' must be a word");
    return *v;
}

std::string ProblemConfig::word_or(const std::string& key, const std::string& fallback) const
{
    return has(key) ? word(key) : fallback;
}

std::vector<double> ProblemConfig::list(const std::string& key) const
{
    const auto it = params_.find(key);
    if (it == params_.end()) throw ConfigError("missing '" + key + "'");
    const auto* v = std::get_if<std::vector<double>>(&it->second);
    if (!v) throw ConfigError("'" + key + "' must be a list");
    return *v;
}

std::vector<double> ProblemConfig::list_or(const std::string& key, std::vector<double> fallback) const
{
    return has(key) ? list(key) : fallback;
}

std::size_t ProblemConfig::count(const std::string& key, std::size_t fallback) const
{
    if (!has(key)) return fallback;
    const double v = number(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
        throw ConfigError("'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::string ProblemConfig::canonical() const
{
    std::ostringstream os;
    os << "kind = " << kind_ << '\n';
    for (const auto& [key, value] : params_) {
        os << key << " = ";
        if (const auto* d = std::get_if<double>(&value)) {
            os << format_number(*d);
        } else if (const auto* w = std::get_if<std::string>(&value)) {
            os << *w;
        } else {
            const auto& l = std::get<std::vector<double>>(value);
            os << '[';
            for (std::size_t i = 0; i < l.size(); ++i) os << (i ? ", " : "") << format_number(l[i]);
            os << ']';
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace opcalc
