#pragma once

// Scenario grids: configuration loading, grid expansion with baseline tagging,
// batch execution over a shared (cell, run) work queue, and CSV/JSON output.
//
// Output files (all CSV files have one header row and fixed columns; reals are
// printed with %.17g so that parsing reproduces the in-memory value exactly):
//
//   cells.csv       one row per grid cell, columns kCellColumns
//   contour_<policy>_ls<lambda_s>_sd<sd>.csv
//                   one block per metric (profit_mean, bpi, fpi, spi, verdict);
//                   rows are surplus shares, columns are discount factors
//   manifest.json   config echo, seed, version, wall time, completion flag
//   INCOMPLETE      present while a run is in progress or after it failed
//   traces/         with --trace: step trace and final q-tables of run 0 per cell

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "holdup/exploration.hpp"
#include "holdup/sim.hpp"
#include "holdup/stats.hpp"

namespace holdup::sweep {

inline constexpr const char* kVersion = "1.0.0";

struct SweepSpec {
    double b = 12.0;
    double mean_theta_s = 60.0;
    double mean_theta_b = 100.0;
    double learning_rate = 0.5;
    std::vector<double> lambda_s_values;  // lambda_b = 1 - lambda_s
    std::vector<double> gamma_values;
    std::vector<double> discount_values;
    std::vector<double> sd_values;        // applied to both state variables
    std::vector<explore::PolicyKind> policies;
    explore::PolicyConfig policy_params;  // kind ignored
    std::size_t runs = 10000;
    long t_learn = 1000;
    long t_eval = 100;
    std::uint64_t master_seed = 1;
    bool hypothesis_tests = true;
    std::string output_dir = "results";

    /// The full parameter grid: lambda_s in {1/2, 7/12, 2/3, 3/4, 5/6},
    /// shares 0.1..0.9, discounts 0..0.9, sd in {0, 5, 10}, all three policies.
    static SweepSpec defaults();
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedConfig {
    SweepSpec spec;
    std::vector<std::string> warnings;
};

/// Parses a JSON config; missing keys keep their defaults, an empty file yields
/// SweepSpec::defaults(). Reals for lambda_s may be given as "p/q" strings.
/// Throws ConfigError naming the offending field.
LoadedConfig load_config(const std::filesystem::path& path);
LoadedConfig parse_config(const std::string& text);

/// Checks the spec invariants; throws ConfigError. Returns non-fatal warnings.
std::vector<std::string> validate(const SweepSpec& spec);

struct CellCoords {
    explore::PolicyKind policy = explore::PolicyKind::boltzmann;
    double lambda_s = 0.5;
    double sd = 0.0;
    double discount = 0.0;
    double gamma_share = 0.5;
};

struct GridCell {
    CellCoords coords;
    sim::ScenarioConfig config;
    std::size_t baseline = 0;  // index of the cell using the optimal share
    double baseline_gamma = 0.5;
    std::uint64_t cell_seed = 0;
};

struct ExpandedGrid {
    std::vector<GridCell> cells;
    std::vector<std::string> notes;
};

std::uint64_t cell_seed(std::uint64_t master_seed, const CellCoords& c);

/// Cartesian product ordered policy > lambda_s > sd > discount > gamma_share.
ExpandedGrid expand_grid(const SweepSpec& spec);

/// Everything written per cell to cells.csv.
struct CellRow {
    std::string policy;
    double lambda_s = 0.0;
    double lambda_b = 0.0;
    double sd_theta = 0.0;
    double gamma_share = 0.0;
    double discount = 0.0;
    std::size_t runs = 0;
    std::size_t failed_runs = 0;
    double baseline_gamma = 0.0;
    std::uint64_t cell_seed = 0;
    double mean_inv_s = 0.0;
    double mean_inv_b = 0.0;
    double mean_profit_s = 0.0;
    double mean_profit_b = 0.0;
    double profit_mean = 0.0;
    double profit_sd = 0.0;
    double profit_skewness = 0.0;
    double hq_star = 0.0;
    double hq_sb = 0.0;
    double fpi = 0.0;
    double spi = 0.0;
    double bpi = 0.0;
    double p_welch = 0.0;
    double p_wilcoxon = 0.0;
    stats::Verdict verdict = stats::Verdict::neither;

    bool operator==(const CellRow&) const = default;
};

extern const char* const kCellColumns;

void write_cells_csv(std::ostream& out, const std::vector<CellRow>& rows);
/// Throws std::runtime_error on a malformed file.
std::vector<CellRow> read_cells_csv(std::istream& in);

struct ExecuteOptions {
    unsigned jobs = 1;
    bool trace = false;
    std::ostream* progress = nullptr;
};

/// Outcome of a sweep held in memory (also what execute() writes to disk).
struct SweepOutcome {
    std::vector<GridCell> grid;
    std::vector<CellRow> rows;
    std::size_t failed_runs = 0;
};

/// Runs every cell, grouping cells that share a baseline so that memory stays
/// bounded by one group. Traces are written to `trace_dir` when set.
SweepOutcome run_sweep(const SweepSpec& spec, const ExecuteOptions& opts,
                       const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

/// run_sweep plus all output files. Returns the process exit code:
/// 0 success, 1 validation failure, 2 runtime failure.
int execute(const SweepSpec& spec, const ExecuteOptions& opts, std::ostream& err);

/// Weighted share mean and significance counts per (policy, lambda_s, sd) group.
struct GroupSummary {
    std::string policy;
    double lambda_s = 0.0;
    double sd_theta = 0.0;
    std::size_t cells = 0;
    std::size_t welch_significant = 0;
    std::size_t wilcoxon_significant = 0;
    std::size_t both_significant = 0;
    std::optional<double> weighted_gamma;
};

std::vector<GroupSummary> summarize_rows(const std::vector<CellRow>& rows);

/// One row of the first-best / second-best reference table.
struct ReferenceRow {
    bool first_best = true;
    double gamma = 0.0;
    double lambda_s = 0.0;  // exact rational
    double lambda_b = 0.0;
    double inv_s, inv_b, quantity, profit_s, profit_b, profit_hq;  // printed values
};

/// The 18 published rows for b=12, E[theta]=(60,100), sigma=0.
const std::vector<ReferenceRow>& reference_rows();

struct TableCheck {
    ReferenceRow expected;
    econ::EquilibriumSolution computed;
    double max_abs_error = 0.0;
    bool pass = false;
};

/// Recomputes every reference row; a row passes when all six values are within
/// `tolerance` (the printed rounding) of the published numbers.
std::vector<TableCheck> verify_tables(double tolerance = 0.005);
void print_table_checks(std::ostream& out, const std::vector<TableCheck>& checks);

}  // namespace holdup::sweep
