#include "opcalc/runner.hpp"

#include "opcalc/arith.hpp"
#include "opcalc/errors.hpp"
#include "opcalc/evolution.hpp"
#include "opcalc/fourier_reduce.hpp"
#include "opcalc/laplace_ops.hpp"
#include "opcalc/ode1d.hpp"
#include "opcalc/pde2d.hpp"
#include "opcalc/series.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace opcalc {

namespace {

constexpr double kDefaultThreshold = 1e-6;

/// Accumulates per-sample residuals.
struct Residuals {
    double worst = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double r)
    {
        worst = std::max(worst, std::isnan(r) ? INFINITY : r);
        sum_sq += r * r;
        ++n;
    }
    ResidualStats stats() const { return {worst, n ? std::sqrt(sum_sq / n) : 0.0, n}; }
};

CoefficientSequence sequence_from(const ProblemConfig& c, const std::string& key)
{
    const auto name = c.word(key);
    if (name != "custom") return sequences::named(name);
    std::vector<complex> values;
    for (double v : c.list("C_values")) values.emplace_back(v);
    return sequences::custom(std::move(values), c.word_or("C_extend", "zero") == "zero");
}

CharPoly poly_from(const ProblemConfig& c, const std::string& re, const std::string& im = "")
{
    const auto real = c.list(re);
    const auto imag = im.empty() ? std::vector<double>{} : c.list_or(im, {});
    if (imag.size() > real.size()) throw ConfigError("'" + im + "' is longer than '" + re + "'");
    std::vector<complex> coeffs;
    for (std::size_t k = 0; k < real.size(); ++k) coeffs.emplace_back(real[k], k < imag.size() ? imag[k] : 0.0);
    return CharPoly(std::move(coeffs));
}

void add_sample(SampleTable& t, std::vector<double> coords, complex v)
{
    t.coords.push_back(std::move(coords));
    t.values.push_back(v);
}

void run_ode1d(const ProblemConfig& c, RunReport& r)
{
    const auto p = poly_from(c, "P", "P_im");
    const auto seq = sequence_from(c, "C");
    const double tol = c.number_or("tolerance", 1e-14);
    const bool lambert = c.word_or("rhs", "exp") == "lambert";
    const auto xs = c.list_or("samples", {0.5, 1.0, 2.0, 5.0});

    const auto sol = lambert ? solve_lambert_rhs(p, seq) : solve_exp_rhs(p, seq);
    r.warnings.insert(r.warnings.end(), sol.warnings.begin(), sol.warnings.end());
    const SeriesRhs rhs = lambert ? SeriesRhs(LambertSeries{seq}) : SeriesRhs(ExpSeries{seq});

    r.samples.columns = {"x"};
    Residuals res;
    for (double x : xs) {
        add_sample(r.samples, {x}, eval_exp_series(sol.u, x, tol).value);
        const double one[] = {x};
        res.add(residual_ode(p, sol.u, rhs, one, tol));
    }
    r.residual = res.stats();
    r.outputs.emplace_back("degree", static_cast<double>(p.degree()));
    for (std::uint64_t n = 1; n <= 5; ++n) {
        const complex u = sol.u.coeffs(n);
        r.outputs.emplace_back("u_" + std::to_string(n) + "_re", u.real());
        r.outputs.emplace_back("u_" + std::to_string(n) + "_im", u.imag());
    }
}

void run_pde2d(const ProblemConfig& c, RunReport& r)
{
    const auto px = poly_from(c, "Px");
    const auto py = poly_from(c, "Py");
    const auto weights = CoefficientSequence2::separable(sequence_from(c, "cx"), sequence_from(c, "cy"));
    const auto N = c.count("N", 96);
    const double tol = c.number_or("tolerance", 1e-13);
    const auto xs = c.list_or("samples_x", {0.5, 1.0, 2.0, 3.0});
    const auto ys = c.list_or("samples_y", {0.5, 1.0, 2.0, 3.0});

    const auto sol = solve_2d(px, py, weights, N);
    r.warnings.insert(r.warnings.end(), sol.warnings.begin(), sol.warnings.end());
    const DoubleLambertSeries g{weights};

    r.samples.columns = {"x", "y"};
    Residuals res;
    for (double x : xs)
        for (double y : ys) {
            add_sample(r.samples, {x, y}, eval_2d(sol, x, y, tol));
            const std::pair<double, double> pt[] = {{x, y}};
            res.add(residual_2d(px, py, sol, g, pt, tol));
        }
    r.residual = res.stats();
    r.outputs.emplace_back("truncation", static_cast<double>(N));
    for (std::size_t n = 1; n <= std::min<std::size_t>(N, 3); ++n)
        for (std::size_t m = 1; m <= std::min<std::size_t>(N, 3); ++m)
            r.outputs.emplace_back("B_" + std::to_string(n) + "_" + std::to_string(m) + "_re",
                                   sol.B(n, m).real());
}

std::function<double(double)> potential(const std::string& name)
{
    if (name == "t") return [](double t) { return t; };
    if (name == "cos") return [](double t) { return std::cos(t); };
    return [](double) { return 0.0; };
}

void run_evolution(const ProblemConfig& c, RunReport& r)
{
    const auto seq = sequence_from(c, "C");
    const double tol = c.number_or("tolerance", 1e-13);
    const auto xs = c.list_or("x", {1.0, 1.5, 2.0, 3.0});
    const auto ts = c.list_or("t", {0.0, 0.25, 0.5});
    r.samples.columns = {"x", "y"};
    Residuals res;

    if (c.word("equation") == "evolution") {
        const auto nu = static_cast<unsigned>(c.number("nu"));
        const auto u = evolution_solution(nu, seq);
        for (double x : xs)
            for (double t : ts) {
                add_sample(r.samples, {x, t}, u.eval(x, t, tol).value);
                const complex lhs = u.eval_derivative(x, t, 0, nu, tol).value + u.eval_derivative(x, t, nu, 0, tol).value;
                res.add(std::abs(lhs));
            }
        r.outputs.emplace_back("nu", nu);
    } else {
        const auto m = static_cast<unsigned>(c.number("m"));
        const auto V = potential(c.word_or("V", "zero"));
        const auto u = schrodinger_solution(m, V, seq, c.number_or("lower_limit", 0.0));
        // u_t by a 5-point difference (one-sided near t = 0, where the series
        // stops converging for t < 0); the x-derivative term-wise.
        const double h = 1e-3;
        for (double x : xs)
            for (double t : ts) {
                const complex v = u.eval(x, t, tol).value;
                add_sample(r.samples, {x, t}, v);
                const auto at = [&](double s) { return u.eval(x, s, tol).value; };
                const complex ut =
                    t >= 2 * h ? (-at(t + 2 * h) + 8.0 * at(t + h) - 8.0 * at(t - h) + at(t - 2 * h)) / (12.0 * h)
                               : (-25.0 * at(t) + 48.0 * at(t + h) - 36.0 * at(t + 2 * h) + 16.0 * at(t + 3 * h)
                                  - 3.0 * at(t + 4 * h)) / (12.0 * h);
                const complex ux = u.eval_derivative(x, t, m, 0, tol).value;
                res.add(std::abs(ut + ux - V(t) * v));
            }
        r.outputs.emplace_back("m", m);
    }
    r.residual = res.stats();
}

OperatorSpec fde_operator(const ProblemConfig& c)
{
    const auto name = c.word("operator");
    const auto plus_affine = [](OperatorSpec op, std::string desc) {
        op.add(1.0, 1).add(1.0, 0);
        op.description = std::move(desc);
        return op;
    };
    using namespace std::complex_literals;
    if (name == "derivative") return OperatorSpec::derivative();
    if (name == "example1") return plus_affine(OperatorSpec::shift(1.0), "e^l + l + 1");
    if (name == "cosh") return plus_affine(OperatorSpec::cosh_shift(1.0), "cosh(l) + l + 1");
    if (name == "cos") return plus_affine(OperatorSpec::cosh_shift(1i), "cos(l) + l + 1");
    if (name == "cos_pi") return plus_affine(OperatorSpec::cosh_shift(std::numbers::pi * 1i), "cos(pi l) + l + 1");
    if (name == "exp_exp") return plus_affine(OperatorSpec::exp_exp_series(), "e^(l - e^l) + l + 1");
    OperatorSpec op;
    const auto w = c.list("weights"), o = c.list("orders"), s = c.list("shifts");
    for (std::size_t k = 0; k < w.size(); ++k) op.add(w[k], static_cast<unsigned>(o[k]), s[k]);
    op.description = "custom";
    return op;
}

void run_fde(const ProblemConfig& c, RunReport& r)
{
    const auto op = fde_operator(c);
    const auto M = static_cast<std::int64_t>(c.count("M", 100));
    std::vector<double> xs = c.list_or("samples", {});
    if (xs.empty())
        for (int j = 0; j < 25; ++j) xs.push_back(0.5 + j * (2.0 * std::numbers::pi - 1.0) / 24.0);
    for (double x : xs)
        if (x < 0.1 || x > 2.0 * std::numbers::pi - 0.1)
            throw DomainError("fde: samples must lie in [0.1, 2 pi - 0.1]");

    const auto y = fourier_fde_solve(op, M);
    r.samples.columns = {"x"};
    Residuals res;
    double imag = 0.0;
    for (double x : xs) {
        const complex v = y(x);
        add_sample(r.samples, {x}, v);
        imag = std::max(imag, std::abs(v.imag()));
        const double one[] = {x};
        res.add(fde_residual(op, y, one));
    }
    r.residual = res.stats();
    r.outputs.emplace_back("M", static_cast<double>(M));
    r.outputs.emplace_back("max_imag", imag);
}

SymbolFunction symbol_from(const ProblemConfig& c)
{
    const auto name = c.word("symbol");
    const double a = c.number_or("a", 1.0);
    if (name == "one") return SymbolFunction::constant(1.0);
    if (name == "derivative") return SymbolFunction::from_operator(OperatorSpec::derivative());
    if (name == "shift") return SymbolFunction::from_operator(OperatorSpec::shift(a));
    if (name == "shift_plus_one") {
        auto op = OperatorSpec::shift(a);
        op.add(1.0, 0);
        op.description = "e^(" + format_number(a) + " l) + 1";
        return SymbolFunction::from_operator(op);
    }
    if (name == "poly") return SymbolFunction::from_poly(poly_from(c, "P"));
    if (name == "log1p") return {[](complex l) { return std::log(1.0 + l); }, "log(1 + l)", 1.0, std::nullopt};
    // log_example: 2 l^2 - a l - log(1 - l)
    return {[a](complex l) { return 2.0 * l * l - a * l - std::log(1.0 - l); },
            "2 l^2 - " + format_number(a) + " l - log(1 - l)", std::nullopt, std::nullopt};
}

void run_laplace(const ProblemConfig& c, RunReport& r)
{
    const auto h = symbol_from(c);
    const auto g = inverse_laplace(LaplaceSpec::parse(c.word("g")));
    const double tol = c.number_or("tolerance", kOperatorTolerance);
    const auto ss = c.list_or("samples", {2.0, 3.0, 4.0, 5.0});
    const auto mode = c.word_or("mode", "solve");
    r.samples.columns = {"x"};
    Residuals res;

    if (mode == "solve") {
        const auto y = solve_operator_eq(h, g);
        const auto ye = y.as_entry();
        for (double s : ss) {
            const auto v = y.evaluate(s, tol);
            add_sample(r.samples, {s}, v.value);
            if (v.restricted) r.warnings.push_back("path restricted at s = " + format_number(s));
            // Apply h back to y: term by term when h has a derivative/shift form.
            complex lhs;
            if (h.terms) {
                lhs = 0.0;
                for (const auto& t : h.terms->terms) lhs += t.weight * y.derivative(s + t.shift, t.order, tol);
            } else {
                lhs = apply_operator(h, ye, s, tol).value;
            }
            res.add(std::abs(lhs - g.transform(s)));
        }
    } else if (mode == "apply") {
        for (double s : ss) {
            const auto v = apply_operator(h, g, s, tol);
            add_sample(r.samples, {s}, v.value);
            if (v.restricted)
                r.warnings.push_back("path restricted at s = " + format_number(s) + " (end "
                                     + format_number(v.path_end) + ")");
            if (h.terms) {
                complex expect = 0.0;
                for (const auto& t : h.terms->terms) expect += t.weight * g.transform_derivative(s + t.shift, t.order);
                res.add(std::abs(v.value - expect));
            }
        }
        if (!h.terms) r.warnings.push_back("symbol has no derivative/shift form; residual not checked");
    } else {
        const auto rep = invert_round_trip(h, g, ss);
        for (std::size_t k = 0; k < ss.size(); ++k) {
            add_sample(r.samples, {ss[k]}, rep.via_integrals[k]);
            res.add(std::abs(rep.via_integrals[k] - rep.expected[k]));
        }
        r.outputs.emplace_back("max_term_error", rep.max_term_error);
    }
    r.residual = res.stats();
}

void run_fourier_reduce(const ProblemConfig& c, RunReport& r)
{
    LinearCoeffODE ode;
    ode.a1 = c.number_or("a1", 0.0);
    ode.b1 = c.number_or("b1", 0.0);
    ode.a2 = c.number_or("a2", 0.0);
    ode.b2 = c.number_or("b2", 0.0);
    ode.a3 = c.number_or("a3", 0.0);
    ode.b3 = c.number_or("b3", 0.0);
    const double L = c.number_or("L", 10.0);
    const auto N = c.count("N", 1024);
    const bool gaussian = c.word("manufactured") == "gaussian";

    // exact f, f', f''
    const auto exact = [gaussian](double x) -> std::array<double, 3> {
        if (gaussian) {
            const double e = std::exp(-0.5 * x * x);
            return {e, -x * e, (x * x - 1.0) * e};
        }
        const double e = std::exp(-x * x);
        return {x * e, (1.0 - 2.0 * x * x) * e, (4.0 * x * x * x - 6.0 * x) * e};
    };
    ode.g = SampledFunction::sample(L, N, [&](double x) {
        const auto f = exact(x);
        return complex((ode.a1 * x + ode.b1) * f[2] + (ode.a2 * x + ode.b2) * f[1] + (ode.a3 * x + ode.b3) * f[0]);
    });

    const auto sol = solve_linear_coeff(ode);
    r.warnings.insert(r.warnings.end(), sol.warnings.begin(), sol.warnings.end());
    r.samples.columns = {"x"};
    double err_max = 0.0, err_sq = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const double x = sol.f.coordinate(j);
        add_sample(r.samples, {x}, sol.f.values[j]);
        const double e = std::abs(sol.f.values[j] - exact(x)[0]);
        err_max = std::max(err_max, e);
        err_sq += e * e;
    }
    const auto [rmax, rl2] = fd_residual(ode, sol.f);
    const double h = sol.f.spacing();
    r.residual = {rmax, rl2 / std::sqrt(h * static_cast<double>(N - 4)), N - 4};
    r.outputs.emplace_back("l2_error", std::sqrt(h * err_sq));
    r.outputs.emplace_back("max_error", err_max);
    r.outputs.emplace_back("refinement", static_cast<double>(sol.refinement));
}

void run_identity(const ProblemConfig& c, RunReport& r)
{
    const auto name = c.word("f");
    const double q = c.number("q");
    const double tol = c.number_or("tolerance", 1e-12);
    TaylorHead f;
    std::optional<double> closed;
    if (name == "mobius-generator" || name == "delta1") {
        f = TaylorHead::finite({1.0});
        f.closed_form = [](double u) { return complex(u); };
        closed = std::exp(-q);
    } else if (name == "phi-generator" || name == "n") {
        f.coeffs = sequences::identity();
        f.closed_form = [](double u) { return complex(u / ((1.0 - u) * (1.0 - u))); };
        closed = std::exp(q / (q - 1.0));
    } else {
        f.coeffs = sequences::named(name);
    }
    const auto rep = product_identity_check(f, q, tol);
    r.samples.columns = {"x"};
    add_sample(r.samples, {q}, rep.rhs);
    Residuals res;
    res.add(std::abs(rep.lhs - rep.rhs));
    r.residual = res.stats();
    r.outputs.emplace_back("lhs_re", rep.lhs.real());
    r.outputs.emplace_back("lhs_im", rep.lhs.imag());
    r.outputs.emplace_back("rhs_re", rep.rhs.real());
    r.outputs.emplace_back("rhs_im", rep.rhs.imag());
    r.outputs.emplace_back("factors_used", static_cast<double>(rep.factors_used));
    if (closed) r.outputs.emplace_back("closed_form_error", std::abs(rep.rhs - *closed));
}

}  // namespace

std::string RunReport::summary() const
{
    std::ostringstream os;
    os << kind << ": ";
    if (exit_code == kExitSolver) {
        os << "solver error: " << error;
    } else {
        os << (exit_code == kExitOk ? "ok" : "residual above threshold") << ", residual max "
           << format_number(residual.max) << " (threshold " << format_number(threshold) << ", "
           << residual.samples << " samples), " << samples.values.size() << " output samples";
    }
    for (const auto& w : warnings) os << "\n  warning: " << w;
    return os.str();
}

std::string RunReport::to_json() const
{
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["config"] = config;
    j["exit_code"] = exit_code;
    if (!error.empty()) j["error"] = error;
    auto& out = j["outputs"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : outputs) out[k] = v;
    j["residual"] = {{"max", residual.max}, {"l2", residual.l2}, {"samples", residual.samples}};
    j["threshold"] = threshold;
    j["warnings"] = warnings;
    j["sample_count"] = samples.values.size();
    j["elapsed_ms"] = elapsed_ms;
    return j.dump(2) + "\n";
}

RunReport run(const ProblemConfig& config, std::optional<double> threshold)
{
    RunReport r;
    r.kind = config.kind();
    r.config = config.canonical();
    const double fde_default = config.kind() == "fde" ? 5.0 / config.number_or("M", 100.0) : kDefaultThreshold;
    r.threshold = threshold ? *threshold : config.number_or("threshold", fde_default);

    const auto start = std::chrono::steady_clock::now();
    try {
        const auto& k = config.kind();
        if (k == "ode1d") run_ode1d(config, r);
        else if (k == "pde2d") run_pde2d(config, r);
        else if (k == "evolution") run_evolution(config, r);
        else if (k == "fde") run_fde(config, r);
        else if (k == "laplace_op") run_laplace(config, r);
        else if (k == "fourier_reduce") run_fourier_reduce(config, r);
        else if (k == "identity_check") run_identity(config, r);
        else throw ConfigError("unknown kind '" + k + "'");
        r.exit_code = r.residual.max <= r.threshold ? kExitOk : kExitThreshold;
    } catch (const ConfigError& e) {
        r.error = e.what();
        r.exit_code = kExitConfig;
    } catch (const std::exception& e) {
        r.error = e.what();
        r.exit_code = kExitSolver;
    } catch (...) {
        r.error = "unknown failure";
        r.exit_code = kExitSolver;
    }
    if (r.exit_code == kExitConfig || r.exit_code == kExitSolver) r.samples = {};
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string samples_csv(const RunReport& report)
{
    std::string out;
    for (const auto& c : report.samples.columns) out += c + ",";
    out += "re,im\n";
    for (std::size_t i = 0; i < report.samples.values.size(); ++i) {
        for (double x : report.samples.coords[i]) out += format_number(x) + ",";
        out += format_number(report.samples.values[i].real()) + "," + format_number(report.samples.values[i].imag())
               + "\n";
    }
    return out;
}

void emit_samples(const RunReport& report, const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << samples_csv(report);
    if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

std::filesystem::path output_directory(const CliOptions& options)
{
    if (options.out) return *options.out;
    if (const char* env = std::getenv("OPCALC_OUT_DIR"); env && *env) return env;
    return ".";
}

namespace {

int solve_one(const std::filesystem::path& path, const CliOptions& options, const std::filesystem::path& out_dir)
{
    const std::string stem = path.stem().string();
    ProblemConfig config;
    try {
        config = ProblemConfig::load(path);
    } catch (const ConfigError& e) {
        std::cerr << path.string() << ": config error: " << e.what() << "\n";
        return kExitConfig;
    }

    RunReport report = run(config, options.threshold);
    if (options.seed_check && report.exit_code != kExitConfig) {
        const RunReport again = run(config, options.threshold);
        if (samples_csv(again) != samples_csv(report) || again.exit_code != report.exit_code) {
            report.warnings.push_back("seed check: second run produced different output");
            report.exit_code = kExitSolver;
            report.error = "nondeterministic output";
        } else {
            report.warnings.push_back("seed check: identical output on rerun");
        }
    }

    try {
        std::filesystem::create_directories(out_dir);
        if (report.exit_code != kExitSolver && report.exit_code != kExitConfig)
            emit_samples(report, out_dir / (stem + ".csv"));
        std::ofstream json(out_dir / (stem + ".json"), std::ios::binary | std::ios::trunc);
        if (!json) throw std::runtime_error("cannot write " + (out_dir / (stem + ".json")).string());
        json << report.to_json();
    } catch (const std::exception& e) {
        std::cerr << stem << ": " << e.what() << "\n";
        return kExitSolver;
    }

    std::cout << stem << " [" << report.kind << "] exit " << report.exit_code << "\n  " << report.summary() << "\n";
    if (report.exit_code == kExitConfig) std::cerr << path.string() << ": config error: " << report.error << "\n";
    if (report.exit_code == kExitSolver) std::cerr << path.string() << ": " << report.error << "\n";
    return report.exit_code;
}

}  // namespace

int solve_command(const CliOptions& options)
{
    namespace fs = std::filesystem;
    const fs::path out_dir = output_directory(options);
    std::error_code ec;
    if (!fs::is_directory(options.config, ec)) return solve_one(options.config, options, out_dir);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(options.config))
        if (e.is_regular_file() && e.path().extension() == ".cfg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << options.config.string() << ": no .cfg files\n";
        return kExitConfig;
    }
    int worst = kExitOk;
    for (const auto& f : files) worst = std::max(worst, solve_one(f, options, out_dir));
    return worst;
}

}  // namespace opcalc
