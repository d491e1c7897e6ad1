#include "holdup/exploration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace holdup::explore {

namespace {

std::size_t uniform_index(std::size_t n, Rng& rng) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::boltzmann: return "boltzmann";
        case PolicyKind::epsilon_greedy: return "epsilon_greedy";
        case PolicyKind::ucb: return "ucb";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    if (name == "boltzmann") return PolicyKind::boltzmann;
    if (name == "epsilon_greedy" || name == "greedy") return PolicyKind::epsilon_greedy;
    if (name == "ucb") return PolicyKind::ucb;
    return std::nullopt;
}

void validate(const PolicyConfig& cfg) {
    if (!(cfg.beta1 > 0.0)) throw std::invalid_argument("policy: beta1 must be positive");
    if (!(cfg.beta2 + 1.0 > 0.0)) throw std::invalid_argument("policy: beta2 + t must be positive for t >= 1");
    if (!(cfg.c1 >= 0.0)) throw std::invalid_argument("policy: c1 must be non-negative");
    if (cfg.learn_horizon < 1) throw std::invalid_argument("policy: learn_horizon must be at least 1");
}

double boltzmann_beta(long t, const PolicyConfig& cfg) {
    return cfg.beta1 / (cfg.beta2 + static_cast<double>(t));
}

std::vector<double> boltzmann_probabilities(std::span<const double> q_row, double beta) {
    const double top = *std::max_element(q_row.begin(), q_row.end());
    std::vector<double> p(q_row.size());
    double total = 0.0;
    for (std::size_t k = 0; k < q_row.size(); ++k) {
        p[k] = std::exp((q_row[k] - top) / beta);
        total += p[k];
    }
    for (double& v : p) v /= total;
    return p;
}

std::size_t boltzmann_select(std::span<const double> q_row, long t, const PolicyConfig& cfg, Rng& rng) {
    const double beta = boltzmann_beta(t, cfg);
    const double top = *std::max_element(q_row.begin(), q_row.end());
    // Unnormalized weights; the row is short so a stack buffer covers the usual case.
    std::array<double, 64> stack{};
    std::vector<double> heap;
    double* w = stack.data();
    if (q_row.size() > stack.size()) {
        heap.resize(q_row.size());
        w = heap.data();
    }
    double total = 0.0;
    for (std::size_t k = 0; k < q_row.size(); ++k) {
        w[k] = std::exp((q_row[k] - top) / beta);
        total += w[k];
    }
    double u = uniform01(rng) * total;
    for (std::size_t k = 0; k < q_row.size(); ++k) {
        u -= w[k];
        if (u < 0.0) return k;
    }
    // Rounding left u marginally non-negative; fall back to the last positive weight.
    for (std::size_t k = q_row.size(); k-- > 0;) {
        if (w[k] > 0.0) return k;
    }
    return q_row.size() - 1;
}

double epsilon(long t, const PolicyConfig& cfg) {
    if (t > cfg.learn_horizon) return 0.0;
    return std::clamp(cfg.eps1 - cfg.eps2 * static_cast<double>(t), 0.0, 1.0);
}

std::size_t argmax_random_tie(std::span<const double> values, Rng& rng) {
    const double top = *std::max_element(values.begin(), values.end());
    std::size_t ties = 0;
    for (double v : values) ties += (v == top);
    std::size_t pick = ties == 1 ? 0 : uniform_index(ties, rng);
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] == top) {
            if (pick == 0) return k;
            --pick;
        }
    }
    return values.size() - 1;
}

std::size_t epsilon_greedy_select(std::span<const double> q_row, long t, const PolicyConfig& cfg, Rng& rng) {
    const double eps = epsilon(t, cfg);
    if (eps > 0.0 && uniform01(rng) < eps) return uniform_index(q_row.size(), rng);
    return argmax_random_tie(q_row, rng);
}

std::size_t ucb_select(std::span<const double> q_row, std::span<const std::uint32_t> visits_row, long t,
                       const PolicyConfig& cfg, Rng& rng) {
    std::size_t unvisited = 0;
    for (auto v : visits_row) unvisited += (v == 0);
    if (unvisited > 0) {
        std::size_t pick = uniform_index(unvisited, rng);
        for (std::size_t k = 0; k < visits_row.size(); ++k) {
            if (visits_row[k] == 0) {
                if (pick == 0) return k;
                --pick;
            }
        }
    }
    const double log_t = std::log(static_cast<double>(std::max(t, 1L)));
    std::array<double, 64> stack{};
    std::vector<double> heap;
    double* score = stack.data();
    if (q_row.size() > stack.size()) {
        heap.resize(q_row.size());
        score = heap.data();
    }
    for (std::size_t k = 0; k < q_row.size(); ++k) {
        score[k] = q_row[k] + cfg.c1 * std::sqrt(log_t / static_cast<double>(visits_row[k]));
    }
    return argmax_random_tie({score, q_row.size()}, rng);
}

std::size_t select(std::span<const double> q_row, std::span<const std::uint32_t> visits_row, long t,
                   const PolicyConfig& cfg, Rng& rng) {
    switch (cfg.kind) {
        case PolicyKind::boltzmann: return boltzmann_select(q_row, t, cfg, rng);
        case PolicyKind::epsilon_greedy: return epsilon_greedy_select(q_row, t, cfg, rng);
        case PolicyKind::ucb: return ucb_select(q_row, visits_row, t, cfg, rng);
    }
    throw std::logic_error("unknown policy kind");
}

}  // namespace holdup::explore
