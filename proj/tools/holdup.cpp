// holdup: run hold-up simulation grids, check the analytic reference table,
// and summarize finished sweeps.
//
//   holdup run <config.json> [--runs N] [--seed S] [--jobs J] [--trace] [--out DIR]
//   holdup verify-tables
//   holdup summarize <cells.csv>
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "holdup/sweep.hpp"

namespace {

using namespace holdup;

int cmd_run(const std::string& config_path, const std::optional<std::size_t>& runs,
            const std::optional<std::uint64_t>& seed, unsigned jobs, bool trace, const std::optional<std::string>& out) {
    sweep::LoadedConfig loaded;
    try {
        loaded = sweep::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    auto& spec = loaded.spec;
    if (runs) spec.runs = *runs;
    if (seed) spec.master_seed = *seed;
    if (out) spec.output_dir = *out;
    sweep::ExecuteOptions opts;
    opts.jobs = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
    opts.trace = trace;
    opts.progress = &std::cout;
    // execute() repeats validation, so warnings from the file are printed there
    return sweep::execute(spec, opts, std::cerr);
}

int cmd_verify_tables() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto checks = sweep::verify_tables();
    sweep::print_table_checks(std::cout, checks);
    std::size_t passed = 0;
    for (const auto& c : checks) passed += c.pass;
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%zu/%zu rows within 0.005 (%.2f ms)\n", passed, checks.size(), ms);
    return passed == checks.size() ? 0 : 2;
}

int cmd_summarize(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return 1;
    }
    std::vector<sweep::CellRow> rows;
    try {
        rows = sweep::read_cells_csv(in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::printf("%-15s %9s %6s %6s %7s %9s %6s %14s\n", "policy", "lambda_s", "sd", "cells", "welch", "wilcoxon",
                "both", "weighted_share");
    for (const auto& g : sweep::summarize_rows(rows)) {
        char share[32] = "-";
        if (g.weighted_gamma) std::snprintf(share, sizeof share, "%.4f", *g.weighted_gamma);
        std::printf("%-15s %9.4f %6g %6zu %7zu %9zu %6zu %14s\n", g.policy.c_str(), g.lambda_s, g.sd_theta, g.cells,
                    g.welch_significant, g.wilcoxon_significant, g.both_significant, share);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hold-up problem simulation with fuzzy Q-learning divisions"};
    app.set_version_flag("--version", std::string(sweep::kVersion));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a parameter grid and write CSV/JSON outputs");
    std::string config_path;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    bool trace = false;
    std::optional<std::string> out;
    run->add_option("config", config_path, "JSON config file (empty file = full default grid)")->required();
    run->add_option("--runs", runs, "runs per cell (overrides config)")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "master seed (overrides config)");
    run->add_option("--jobs", jobs, "worker threads, 0 = all cores")->capture_default_str();
    run->add_flag("--trace", trace, "write step trace and final q-tables of run 0 for every cell");
    run->add_option("--out", out, "output directory (overrides config)");

    auto* verify = app.add_subcommand("verify-tables", "recompute the first-best/second-best reference table");

    auto* summarize = app.add_subcommand("summarize", "significance counts and weighted share per group");
    std::string cells_path;
    summarize->add_option("cells", cells_path, "cells.csv written by 'run'")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run->parsed()) return cmd_run(config_path, runs, seed, jobs, trace, out);
    if (verify->parsed()) return cmd_verify_tables();
    if (summarize->parsed()) return cmd_summarize(cells_path);
    return 1;
}
