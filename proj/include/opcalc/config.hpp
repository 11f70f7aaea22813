#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace opcalc {

/// Malformed or invalid problem description. Deliberately not an opcalc::Error:
/// the CLI reports it with its own exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ConfigValue = std::variant<double, std::string, std::vector<double>>;

/// One problem: `kind` plus kind-specific parameters.
///
/// Text format, one `key = value` per line, `#` starts a comment:
///   number   1e-8
///   word     sigma0            (letters, digits, '_', '-', ':', '.')
///   list     [1, 0, 1]         (numbers only)
class ProblemConfig {
public:
    static ProblemConfig parse(const std::string& text);
    static ProblemConfig load(const std::filesystem::path& path);

    const std::string& kind() const noexcept { return kind_; }
    const std::map<std::string, ConfigValue>& params() const noexcept { return params_; }

    bool has(const std::string& key) const { return params_.count(key) != 0; }
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::string word(const std::string& key) const;
    std::string word_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key) const;
    std::vector<double> list_or(const std::string& key, std::vector<double> fallback) const;
    /// Non-negative integer-valued number.
    std::size_t count(const std::string& key, std::size_t fallback) const;

    /// Sorted keys, numbers with 17 significant digits; parse(canonical()) == *this.
    std::string canonical() const;

    bool operator==(const ProblemConfig&) const = default;

private:
    std::string kind_;
    std::map<std::string, ConfigValue> params_;
};

/// Kinds accepted by the runner.
const std::vector<std::string>& config_kinds();

std::string format_number(double v);

}  // namespace opcalc
