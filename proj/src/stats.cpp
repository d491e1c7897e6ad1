#include "holdup/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace holdup::stats {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x, double mean) {
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

constexpr std::size_t kExactLimit = 50;

// P(rank sum of a >= observed) under random assignment of the pooled doubled
// midranks, by counting subsets of size n_a per attainable sum.
double exact_upper_tail(const std::vector<long>& doubled_ranks, std::size_t n_a, long observed) {
    const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
    // ways[k][s]: number of k-subsets of the ranks seen so far with sum s
    std::vector<std::vector<long double>> ways(n_a + 1, std::vector<long double>(static_cast<std::size_t>(total) + 1, 0.0L));
    ways[0][0] = 1.0L;
    for (long r : doubled_ranks) {
        for (std::size_t k = n_a; k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (long s = total; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
        }
    }
    long double hit = 0.0L;
    long double all = 0.0L;
    for (long s = 0; s <= total; ++s) {
        const long double w = ways[n_a][static_cast<std::size_t>(s)];
        all += w;
        if (s >= observed) hit += w;
    }
    return static_cast<double>(hit / all);
}

}  // namespace

SampleSummary summarize(std::span<const double> samples) {
    SampleSummary s;
    s.n = samples.size();
    if (s.n == 0) throw std::invalid_argument("summarize: empty sample");
    s.mean = mean_of(samples);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : samples) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(s.n);
    s.sd = s.n >= 2 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0 || s.n < 2) {
        s.degenerate = true;
        s.skewness = 0.0;
    } else {
        s.skewness = m3 / std::pow(m2, 1.5);
    }
    return s;
}

double welch_one_tailed(std::span<const double> a, std::span<const double> b, double d_h) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch: each sample needs at least two values");
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double se_a = sample_variance(a, ma) / static_cast<double>(a.size());
    const double se_b = sample_variance(b, mb) / static_cast<double>(b.size());
    const double se2 = se_a + se_b;
    if (se2 <= 0.0) return (ma - mb > d_h) ? 0.0 : 1.0;
    const double t = (ma - mb - d_h) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (se_a * se_a / static_cast<double>(a.size() - 1) + se_b * se_b / static_cast<double>(b.size() - 1));
    const boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double wilcoxon_rank_sum_shifted(std::span<const double> a, std::span<const double> b, double d_h) {
    if (a.empty() || b.empty()) throw std::invalid_argument("rank-sum: samples must be non-empty");
    std::vector<double> pooled(a.begin(), a.end());
    for (double v : b) pooled.push_back(v + d_h);
    const std::vector<double> ranks = midranks(pooled);

    const std::size_t n_a = a.size();
    const std::size_t n_b = b.size();
    const double n = static_cast<double>(n_a + n_b);
    double w = 0.0;
    for (std::size_t i = 0; i < n_a; ++i) w += ranks[i];

    // tie-group sizes
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    if (tie_term == n * n * n - n) return 0.5;

    if (n_a < kExactLimit && n_b < kExactLimit) {
        std::vector<long> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
        return exact_upper_tail(doubled, n_a, std::lround(2.0 * w));
    }

    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    const double expected = na * (n + 1.0) / 2.0;
    const double variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    const double z = (w - expected - 0.5) / std::sqrt(variance);
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

Indicators indicators(double profit_mean, double hq_star, double hq_sb, double baseline_mean) {
    if (hq_star == 0.0 || hq_sb == 0.0 || baseline_mean == 0.0) {
        throw std::invalid_argument("indicators: zero reference profit");
    }
    return {profit_mean / hq_star, (profit_mean - hq_sb) / hq_sb, (profit_mean - baseline_mean) / baseline_mean};
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::both_significant: return "both_significant";
        case Verdict::welch_only: return "welch_only";
        case Verdict::wilcoxon_only: return "wilcoxon_only";
        case Verdict::neither: return "neither";
    }
    return "neither";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
    for (Verdict v : {Verdict::both_significant, Verdict::welch_only, Verdict::wilcoxon_only, Verdict::neither}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

Verdict verdict_from(double p_welch, double p_wilcoxon, double level) {
    const bool w = p_welch <= level;
    const bool r = p_wilcoxon <= level;
    if (w && r) return Verdict::both_significant;
    if (w) return Verdict::welch_only;
    if (r) return Verdict::wilcoxon_only;
    return Verdict::neither;
}

std::optional<double> weighted_gamma_mean(std::span<const GammaWeight> cells) {
    double num = 0.0;
    double den = 0.0;
    bool any = false;
    for (const auto& c : cells) {
        if (c.verdict != Verdict::both_significant) continue;
        any = true;
        num += c.gamma * c.bpi;
        den += c.bpi;
    }
    if (!any || den == 0.0) return std::nullopt;
    return num / den;
}

SweepCell build_sweep_cell(std::span<const double> cell_profits, std::span<const double> baseline_profits,
                           const econ::EconParams& econ, double discount) {
    if (cell_profits.empty() || baseline_profits.empty()) throw std::invalid_argument("sweep cell: empty sample");
    SweepCell cell;
    cell.gamma_share = econ.gamma_share;
    cell.discount = discount;
    cell.profit_mean = mean_of(cell_profits);
    const double baseline_mean = mean_of(baseline_profits);
    const auto ind = indicators(cell.profit_mean, econ::first_best(econ).profit_hq, econ::second_best(econ).profit_hq,
                                baseline_mean);
    cell.fpi = ind.fpi;
    cell.spi = ind.spi;
    cell.bpi = ind.bpi;
    const double d_h = baseline_mean / 100.0;
    cell.p_welch = welch_one_tailed(cell_profits, baseline_profits, d_h);
    cell.p_wilcoxon = wilcoxon_rank_sum_shifted(cell_profits, baseline_profits, d_h);
    cell.verdict = verdict_from(cell.p_welch, cell.p_wilcoxon);
    return cell;
}

}  // namespace holdup::stats
