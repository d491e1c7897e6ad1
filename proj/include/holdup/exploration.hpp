#pragma once

// Per-rule action-index selection: Boltzmann (softmax), epsilon-greedy and UCB.
//
// Time t is the global, 1-based step counter of a run. All selectors return a
// 0-based index into the rule's q-row.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holdup/random.hpp"

namespace holdup::explore {

enum class PolicyKind { boltzmann, epsilon_greedy, ucb };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::boltzmann;
    // beta(t) = beta1 / (beta2 + t): 50 at t=1, 10 at t=1000.
    double beta1 = 12487.5;
    double beta2 = 248.75;
    // eps(t) = eps1 - eps2 * t: 1 at t=1, 0 at t=1000.
    double eps1 = 1.0 + 1.0 / 999.0;
    double eps2 = 1.0 / 999.0;
    double c1 = 30.0;
    long learn_horizon = 1000;
};

void validate(const PolicyConfig& cfg);

double boltzmann_beta(long t, const PolicyConfig& cfg);

/// Softmax of q/beta, computed after subtracting the row maximum.
std::vector<double> boltzmann_probabilities(std::span<const double> q_row, double beta);

std::size_t boltzmann_select(std::span<const double> q_row, long t, const PolicyConfig& cfg, Rng& rng);

/// Linear schedule for t <= learn_horizon, zero afterwards, clamped to [0,1].
double epsilon(long t, const PolicyConfig& cfg);

std::size_t epsilon_greedy_select(std::span<const double> q_row, long t, const PolicyConfig& cfg, Rng& rng);

/// Unvisited indices first (uniformly); otherwise argmax of q + c1*sqrt(ln t / visits).
/// The caller records the visit.
std::size_t ucb_select(std::span<const double> q_row, std::span<const std::uint32_t> visits_row, long t,
                       const PolicyConfig& cfg, Rng& rng);

/// Argmax with ties broken uniformly at random.
std::size_t argmax_random_tie(std::span<const double> values, Rng& rng);

/// Dispatches on cfg.kind.
std::size_t select(std::span<const double> q_row, std::span<const std::uint32_t> visits_row, long t,
                   const PolicyConfig& cfg, Rng& rng);

}  // namespace holdup::explore
