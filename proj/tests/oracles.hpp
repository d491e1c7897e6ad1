#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: the t distribution is integrated numerically and rank-sum
// p-values come from enumerating every assignment.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// Upper tail of Student's t by composite Simpson integration of the density.
inline double t_upper_tail_oracle(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
    auto pdf = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
    const double a = std::abs(t);
    const int n = 200000;
    const double h = a / n;
    double s = pdf(0.0) + pdf(a);
    for (int i = 1; i < n; ++i) s += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
    const double mass = s * h / 3.0;  // P(0 < T < |t|)
    return t >= 0.0 ? 0.5 - mass : 0.5 + mass;
}

inline double welch_oracle(const std::vector<double>& a, const std::vector<double>& b, double d_h) {
    auto mv = [](const std::vector<double>& x, double& m, double& v) {
        m = 0.0;
        for (double e : x) m += e;
        m /= static_cast<double>(x.size());
        v = 0.0;
        for (double e : x) v += (e - m) * (e - m);
        v /= static_cast<double>(x.size() - 1);
    };
    double ma, va, mb, vb;
    mv(a, ma, va);
    mv(b, mb, vb);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double t = (ma - mb - d_h) / std::sqrt(va / na + vb / nb);
    const double df = std::pow(va / na + vb / nb, 2) /
                      (std::pow(va / na, 2) / (na - 1.0) + std::pow(vb / nb, 2) / (nb - 1.0));
    return t_upper_tail_oracle(t, df);
}

// Rank sum of the first n_a pooled entries after midranking, computed by counting.
inline double rank_sum(const std::vector<double>& pooled, const std::vector<bool>& in_a) {
    double w = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (!in_a[i]) continue;
        double less = 0.0;
        double equal = 0.0;
        for (double v : pooled) {
            less += v < pooled[i];
            equal += v == pooled[i];
        }
        w += less + (equal + 1.0) / 2.0;
    }
    return w;
}

// Exhaustive enumeration of every assignment of n_a pooled values to sample a.
inline double rank_sum_oracle(const std::vector<double>& a, const std::vector<double>& b, double d_h) {
    std::vector<double> pooled = a;
    for (double v : b) pooled.push_back(v + d_h);
    std::vector<bool> observed(pooled.size(), false);
    std::fill(observed.begin(), observed.begin() + static_cast<long>(a.size()), true);
    const double w_obs = rank_sum(pooled, observed);
    std::vector<bool> mask(pooled.size(), false);
    std::fill(mask.end() - static_cast<long>(a.size()), mask.end(), true);
    double hit = 0.0;
    double total = 0.0;
    do {
        total += 1.0;
        if (rank_sum(pooled, mask) >= w_obs - 1e-9) hit += 1.0;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return hit / total;
}


struct WelchFixture {
    std::vector<double> a;
    std::vector<double> b;
    double d_h;
};

// Twenty fixed two-sample fixtures of varying size, spread and shift.
inline std::vector<WelchFixture> welch_fixtures() {
    std::vector<WelchFixture> out;
    out.push_back({{2.1, 2.0, 1.9, 2.2}, {1.0, 1.1, 0.9, 1.0}, 0.5});
    std::mt19937_64 rng(99);
    for (int f = 1; f < 20; ++f) {
        std::normal_distribution<double> na(10.0 + 0.2 * f, 1.0 + 0.1 * f);
        std::normal_distribution<double> nb(10.0, 2.0);
        std::vector<double> a(static_cast<std::size_t>(3 + (f * 7) % 28));
        std::vector<double> b(static_cast<std::size_t>(2 + (f * 5) % 19));
        for (auto& v : a) v = na(rng);
        for (auto& v : b) v = nb(rng);
        out.push_back({a, b, 0.1 * (f % 5)});
    }
    return out;
}

}  // namespace oracle
