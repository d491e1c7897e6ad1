#pragma once

// Batch aggregation: moments, one-tailed two-sample tests against a baseline
// with a hypothesized improvement d_h, and the three performance indicators.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "holdup/econ.hpp"

namespace holdup::stats {

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;        // sample (n-1) standard deviation
    double skewness = 0.0;  // m3 / m2^1.5 with central moments m_k
    bool degenerate = false;  // zero spread: skewness reported as 0
};

SampleSummary summarize(std::span<const double> samples);

/// Upper-tail p-value of Welch's t-test for H1: mean(a) - mean(b) > d_h.
/// When both samples have zero variance the result is 0 if the mean
/// difference exceeds d_h and 1 otherwise.
double welch_one_tailed(std::span<const double> a, std::span<const double> b, double d_h);

/// One-sided rank-sum test of a against b + d_h (H1: a tends to be larger).
/// Uses midranks. Exact distribution when both samples have fewer than 50
/// elements; otherwise the normal approximation with tie and continuity
/// corrections. An all-tied pooled sample gives 0.5.
double wilcoxon_rank_sum_shifted(std::span<const double> a, std::span<const double> b, double d_h);

/// Midranks (1-based, ties averaged) of `values` in their original order.
std::vector<double> midranks(std::span<const double> values);

struct Indicators {
    double fpi = 0.0;  // profit / first-best profit
    double spi = 0.0;  // relative change against the second-best profit
    double bpi = 0.0;  // relative change against the baseline profit
};

Indicators indicators(double profit_mean, double hq_star, double hq_sb, double baseline_mean);

enum class Verdict { both_significant, welch_only, wilcoxon_only, neither };

inline constexpr double kSignificance = 0.05;

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);
/// A test is significant when its p-value is at most `level`.
Verdict verdict_from(double p_welch, double p_wilcoxon, double level = kSignificance);

struct GammaWeight {
    double gamma = 0.0;
    double bpi = 0.0;
    Verdict verdict = Verdict::neither;
};

/// sum(gamma * bpi) / sum(bpi) over both_significant cells; empty when no cell
/// qualifies or the weights sum to zero.
std::optional<double> weighted_gamma_mean(std::span<const GammaWeight> cells);

struct SweepCell {
    double gamma_share = 0.0;
    double discount = 0.0;
    double profit_mean = 0.0;
    double fpi = 0.0;
    double spi = 0.0;
    double bpi = 0.0;
    double p_welch = 1.0;
    double p_wilcoxon = 1.0;
    Verdict verdict = Verdict::neither;
};

/// Tests the per-run headquarters profit means of a cell against those of its
/// baseline cell with d_h = mean(baseline)/100 and fills the indicators from the
/// analytic solutions of `econ` (second-best always at the optimal share).
SweepCell build_sweep_cell(std::span<const double> cell_profits, std::span<const double> baseline_profits,
                           const econ::EconParams& econ, double discount);

}  // namespace holdup::stats
