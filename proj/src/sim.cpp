#include "holdup/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace holdup::sim {

namespace {

constexpr std::uint64_t kSellerStream = 1;
constexpr std::uint64_t kBuyerStream = 2;
constexpr std::uint64_t kEnvStream = 3;

Agent make_agent(Role role, const ScenarioConfig& cfg, std::uint64_t run_seed) {
    Agent a{role,
            fuzzy::QTable(cfg.partition.rule_count(), cfg.stored_actions),
            Rng(derive_seed(run_seed, role == Role::seller ? kSellerStream : kBuyerStream)),
            fuzzy::RuleSelection(cfg.partition.rule_count(), 0)};
    return a;
}

void choose(Agent& agent, const fuzzy::TruthValues& truth, long t, const explore::PolicyConfig& policy,
            const SelectionHook& hook) {
    for (std::size_t rule : truth.active) {
        const std::size_t k = hook ? hook(agent.role, rule, t)
                                   : explore::select(agent.qtable.q_row(rule), agent.qtable.visits_row(rule), t,
                                                     policy, agent.rng);
        if (k >= agent.qtable.actions()) throw std::out_of_range("selected action index out of range");
        agent.selection[rule] = k;
        agent.qtable.record_visit(rule, k);
    }
}

void learn(Agent& agent, const fuzzy::TruthValues& truth, const fuzzy::TruthValues& next_truth, double reward,
           const ScenarioConfig& cfg) {
    const double q_old = fuzzy::infer_q(agent.qtable, truth, agent.selection);
    const double delta = fuzzy::td_error(q_old, reward, next_truth, agent.qtable, cfg.learning_rate, cfg.discount);
    fuzzy::update(agent.qtable, truth, agent.selection, delta);
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    econ::validate(cfg.econ);
    explore::validate(cfg.policy);
    if (!(cfg.discount >= 0.0 && cfg.discount < 1.0)) throw std::invalid_argument("discount must lie in [0,1)");
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
        throw std::invalid_argument("learning_rate must lie in (0,1]");
    }
    if (cfg.t_learn < 1) throw std::invalid_argument("t_learn must be at least 1");
    if (cfg.t_eval < 1) throw std::invalid_argument("t_eval must be at least 1");
    if (cfg.stored_actions.empty()) throw std::invalid_argument("stored_actions must not be empty");
    if (!std::is_sorted(cfg.stored_actions.begin(), cfg.stored_actions.end(), std::less_equal<>())) {
        throw std::invalid_argument("stored_actions must be strictly increasing");
    }
    if (cfg.stored_actions.front() < cfg.partition.lower() || cfg.stored_actions.back() > cfg.partition.upper()) {
        throw std::invalid_argument("stored_actions must lie inside the state partition");
    }
}

RunState init_run(const ScenarioConfig& cfg, std::uint64_t run_index) {
    const std::uint64_t run_seed = derive_seed(cfg.master_seed, run_index);
    RunState run{make_agent(Role::seller, cfg, run_seed), make_agent(Role::buyer, cfg, run_seed), {},
                 Rng(derive_seed(run_seed, kEnvStream)), {}, {}, {}};
    const double lo = cfg.partition.lower();
    const double hi = cfg.partition.upper();
    const double s = lo + (hi - lo) * uniform01(run.env_rng);
    const double b = lo + (hi - lo) * uniform01(run.env_rng);
    run.state = fuzzy::StateVector::clamped(s, b, lo, hi);
    return run;
}

StepRecord step(RunState& run, long t, const ScenarioConfig& cfg, const SelectionHook& hook) {
    explore::PolicyConfig policy = cfg.policy;
    policy.learn_horizon = cfg.t_learn;

    fuzzy::truth_values(cfg.partition, run.state, run.truth);
    choose(run.seller, run.truth, t, policy, hook);
    choose(run.buyer, run.truth, t, policy, hook);

    StepRecord rec;
    rec.t = t;
    rec.inv_s = fuzzy::infer_action(run.seller.qtable, run.truth, run.seller.selection);
    rec.inv_b = fuzzy::infer_action(run.buyer.qtable, run.truth, run.buyer.selection);

    const auto& e = cfg.econ;
    rec.theta_s = e.sd_theta_s > 0.0 ? e.mean_theta_s + e.sd_theta_s * run.normal(run.env_rng) : e.mean_theta_s;
    rec.theta_b = e.sd_theta_b > 0.0 ? e.mean_theta_b + e.sd_theta_b * run.normal(run.env_rng) : e.mean_theta_b;

    const econ::Realization r{rec.theta_s, rec.theta_b, rec.inv_s, rec.inv_b};
    rec.quantity = econ::efficient_quantity(r.theta_s, r.theta_b, r.inv_s, r.inv_b, e.b);
    const auto profits = econ::division_profits(r, e);
    rec.profit_s = profits.seller;
    rec.profit_b = profits.buyer;
    rec.profit_hq = profits.seller + profits.buyer;
    if (!std::isfinite(rec.profit_s) || !std::isfinite(rec.profit_b) || !std::isfinite(rec.inv_s) ||
        !std::isfinite(rec.inv_b)) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "non-finite value at t=%ld (I_S=%g, I_B=%g, Pi_S=%g, Pi_B=%g)", t, rec.inv_s,
                      rec.inv_b, rec.profit_s, rec.profit_b);
        throw std::runtime_error(msg);
    }

    run.state = fuzzy::StateVector::clamped(rec.inv_s, rec.inv_b, cfg.partition.lower(), cfg.partition.upper());
    fuzzy::truth_values(cfg.partition, run.state, run.next_truth);
    learn(run.seller, run.truth, run.next_truth, rec.profit_s, cfg);
    learn(run.buyer, run.truth, run.next_truth, rec.profit_b, cfg);
    return rec;
}

RunResult run_episode(const ScenarioConfig& cfg, std::uint64_t run_index, bool keep_trace) {
    RunResult result;
    result.run_index = run_index;
    try {
        RunState run = init_run(cfg, run_index);
        if (keep_trace) result.trace.reserve(static_cast<std::size_t>(cfg.horizon()));
        double inv_s = 0.0, inv_b = 0.0, hq = 0.0, ps = 0.0, pb = 0.0;
        for (long t = 1; t <= cfg.horizon(); ++t) {
            const StepRecord rec = step(run, t, cfg);
            if (keep_trace) result.trace.push_back(rec);
            if (t > cfg.t_learn) {
                inv_s += rec.inv_s;
                inv_b += rec.inv_b;
                hq += rec.profit_hq;
                ps += rec.profit_s;
                pb += rec.profit_b;
            }
        }
        const double n = static_cast<double>(cfg.t_eval);
        result.mean_inv_s = inv_s / n;
        result.mean_inv_b = inv_b / n;
        result.mean_profit_hq = hq / n;
        result.mean_profit_s = ps / n;
        result.mean_profit_b = pb / n;
    } catch (const std::exception& ex) {
        result.ok = false;
        result.error = ex.what();
    }
    return result;
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

std::vector<RunResult> run_batch(const ScenarioConfig& cfg, unsigned jobs) {
    validate(cfg);
    std::vector<RunResult> results(cfg.runs);
    parallel_for(cfg.runs, jobs, [&](std::size_t i) { results[i] = run_episode(cfg, i); });
    return results;
}

void write_trace_csv(std::ostream& out, const std::vector<StepRecord>& trace) {
    out << "t,inv_s,inv_b,theta_s,theta_b,quantity,profit_s,profit_b,profit_hq\n";
    char buf[320];
    for (const auto& r : trace) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.inv_s, r.inv_b,
                      r.theta_s, r.theta_b, r.quantity, r.profit_s, r.profit_b, r.profit_hq);
        out << buf;
    }
}

}  // namespace holdup::sim
