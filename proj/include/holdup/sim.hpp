#pragma once

// One simulation run: two fuzzy Q-learning divisions repeatedly choose
// investments, observe the negotiated outcome, and learn from their own
// divisional profit.
//
// Per step: both agents read the joint state (last seller and buyer
// investment), pick one stored action per active rule, infer their
// investment, the state variables are drawn, the efficient quantity is traded,
// each agent is rewarded with its divisional profit, the state moves to the new
// investment pair, and each agent applies its TD update. Learning continues
// through the evaluation window; only the exploration schedules change.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "holdup/econ.hpp"
#include "holdup/exploration.hpp"
#include "holdup/fuzzy.hpp"
#include "holdup/random.hpp"

namespace holdup::sim {

struct ScenarioConfig {
    econ::EconParams econ;
    double discount = 0.0;
    double learning_rate = 0.5;
    explore::PolicyConfig policy;  // learn_horizon is overridden by t_learn
    long t_learn = 1000;
    long t_eval = 100;
    std::size_t runs = 10000;
    std::uint64_t master_seed = 0x5eedULL;
    fuzzy::FuzzyPartition partition;
    std::vector<double> stored_actions{0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};

    long horizon() const { return t_learn + t_eval; }
};

/// Throws std::invalid_argument on the first invalid field.
void validate(const ScenarioConfig& cfg);

enum class Role { seller, buyer };

struct Agent {
    Role role;
    fuzzy::QTable qtable;
    Rng rng;
    fuzzy::RuleSelection selection;
};

struct StepRecord {
    long t = 0;
    double inv_s = 0.0;
    double inv_b = 0.0;
    double theta_s = 0.0;
    double theta_b = 0.0;
    double quantity = 0.0;
    double profit_s = 0.0;
    double profit_b = 0.0;
    double profit_hq = 0.0;
};

struct RunState {
    Agent seller;
    Agent buyer;
    fuzzy::StateVector state;
    Rng env_rng;
    std::normal_distribution<double> normal{0.0, 1.0};
    // scratch buffers
    fuzzy::TruthValues truth;
    fuzzy::TruthValues next_truth;
};

/// Replaces policy selection; receives (role, rule, t) and returns an action index.
using SelectionHook = std::function<std::size_t(Role, std::size_t, long)>;

/// Fresh agents with zero q-tables and an initial state drawn uniformly from
/// the partition hull. All streams derive from (master_seed, run_index).
RunState init_run(const ScenarioConfig& cfg, std::uint64_t run_index);

/// Advances one step. Throws std::runtime_error if a non-finite value appears.
StepRecord step(RunState& run, long t, const ScenarioConfig& cfg, const SelectionHook& hook = {});

struct RunResult {
    std::uint64_t run_index = 0;
    bool ok = true;
    std::string error;
    double mean_inv_s = 0.0;
    double mean_inv_b = 0.0;
    double mean_profit_hq = 0.0;
    double mean_profit_s = 0.0;
    double mean_profit_b = 0.0;
    std::vector<StepRecord> trace;  // filled only when requested
};

RunResult run_episode(const ScenarioConfig& cfg, std::uint64_t run_index, bool keep_trace = false);

/// Runs cfg.runs episodes on up to `jobs` threads. A failing run is reported in
/// its RunResult and does not stop the batch. Output is ordered by run index and
/// independent of `jobs`.
std::vector<RunResult> run_batch(const ScenarioConfig& cfg, unsigned jobs = 1);

/// Calls fn(i) for every i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// Columns: t,inv_s,inv_b,theta_s,theta_b,quantity,profit_s,profit_b,profit_hq
void write_trace_csv(std::ostream& out, const std::vector<StepRecord>& trace);

}  // namespace holdup::sim
