#include "opcalc/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"opcalc: divisor-sum, Fourier and Laplace solvers with residual checks"};
    app.require_subcommand(1);

    opcalc::CliOptions options;
    std::string out;
    double threshold = 0.0;
    auto* solve = app.add_subcommand("solve", "solve one problem file, or every *.cfg in a directory");
    solve->add_option("config", options.config, "config file or directory")->required();
    auto* out_opt = solve->add_option("--out", out, "output directory (default: $OPCALC_OUT_DIR, then .)");
    auto* thr_opt = solve->add_option("--threshold", threshold, "residual acceptance threshold")
                        ->check(CLI::PositiveNumber);
    solve->add_flag("--seed-check", options.seed_check, "run twice and require byte-identical samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : opcalc::kExitConfig;
    }
    if (*out_opt) options.out = out;
    if (*thr_opt) options.threshold = threshold;

    try {
        return opcalc::solve_command(options);
    } catch (const std::exception& e) {
        std::cerr << "opcalc: " << e.what() << "\n";
        return opcalc::kExitSolver;
    }
}
