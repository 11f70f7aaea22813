#pragma once

#include "opcalc/config.hpp"

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitThreshold = 4,
};

struct ResidualStats {
    double max = 0.0;
    double l2 = 0.0;          // root mean square over the samples
    std::size_t samples = 0;
};

/// Sample table. `columns` are the coordinate headers ("x" or "x", "y").
struct SampleTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> coords;   // one row of coordinates per sample
    std::vector<std::complex<double>> values;
};

struct RunReport {
    std::string config;                                   // canonical echo
    std::string kind;
    std::vector<std::pair<std::string, double>> outputs;  // named scalar results
    SampleTable samples;
    ResidualStats residual;
    double threshold = 0.0;
    std::vector<std::string> warnings;
    std::string error;                                    // set when the solver failed
    double elapsed_ms = 0.0;
    int exit_code = kExitOk;

    std::string summary() const;
    std::string to_json() const;
};

/// Runs one problem. Never throws: solver failures become exit 3, a residual
/// above the threshold exit 4. `threshold` overrides the configured one.
RunReport run(const ProblemConfig& config, std::optional<double> threshold = std::nullopt);

/// CSV bytes of the sample table, 17 significant digits.
std::string samples_csv(const RunReport& report);
/// Writes samples_csv(report) to `path`; I/O errors throw std::runtime_error.
void emit_samples(const RunReport& report, const std::filesystem::path& path);

struct CliOptions {
    std::filesystem::path config;       // file, or a directory of *.cfg files
    std::optional<std::filesystem::path> out;
    std::optional<double> threshold;
    bool seed_check = false;
};

/// Output directory: --out, then $OPCALC_OUT_DIR, then the working directory.
std::filesystem::path output_directory(const CliOptions& options);

/// Full `solve` command: load, run, write <stem>.csv and <stem>.json, print a
/// summary. Returns the process exit code (the worst one in batch mode).
int solve_command(const CliOptions& options);

}  // namespace opcalc
