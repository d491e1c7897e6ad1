#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "holdup/fuzzy.hpp"

using namespace holdup::fuzzy;

namespace {

// Independent triangular membership on the default grid.
double tri(double x, double center) {
    const double w = 12.5;
    if (center == 0.0 && x <= 0.0) return 1.0;
    if (center == 50.0 && x >= 50.0) return 1.0;
    return std::max(0.0, 1.0 - std::abs(x - center) / w);
}

}  // namespace

TEST_CASE("per-dimension memberships") {
    const FuzzyPartition p;
    const auto m = p.memberships(0, 10.0);
    REQUIRE(m.size() == 5);
    CHECK(m[0] == doctest::Approx(0.2));
    CHECK(m[1] == doctest::Approx(0.8));
    CHECK(m[2] == 0.0);
    CHECK(m[3] == 0.0);
    CHECK(m[4] == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 60);
    const double centers[] = {0, 12.5, 25, 37.5, 50};
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        const auto mm = p.memberships(1, x);
        for (int k = 0; k < 5; ++k) CHECK(mm[k] == doctest::Approx(tri(x, centers[k])).epsilon(1e-12));
    }
}

TEST_CASE("truth values on and off the grid") {
    const FuzzyPartition p;
    const auto on = truth_values(p, {12.5, 25});
    REQUIRE(on.active.size() == 1);
    CHECK(on.active[0] == 1 * 5 + 2);
    CHECK(on.alpha[7] == 1.0);

    const auto off = truth_values(p, {10, 10});
    REQUIRE(off.active.size() == 4);
    std::vector<double> vals;
    for (auto i : off.active) vals.push_back(off.alpha[i]);
    std::sort(vals.begin(), vals.end());
    CHECK(vals[0] == doctest::Approx(0.04));
    CHECK(vals[1] == doctest::Approx(0.16));
    CHECK(vals[2] == doctest::Approx(0.16));
    CHECK(vals[3] == doctest::Approx(0.64));
    CHECK(off.alpha[0 * 5 + 0] == doctest::Approx(0.04));
    CHECK(off.alpha[1 * 5 + 1] == doctest::Approx(0.64));
}

TEST_CASE("partition of unity over random states") {
    const FuzzyPartition p;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 50);
    TruthValues t;
    for (int i = 0; i < 10000; ++i) {
        truth_values(p, {u(rng), u(rng)}, t);
        const double sum = std::accumulate(t.alpha.begin(), t.alpha.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-10);
        CHECK(t.active.size() <= 4);
        for (double a : t.alpha) CHECK((a >= 0.0 && a <= 1.0));
    }
}

TEST_CASE("custom partition must be strictly increasing") {
    CHECK_THROWS(FuzzyPartition({0, 10, 10}, {0, 50}));
    CHECK_NOTHROW(FuzzyPartition({0, 25, 50}, {0, 50}));
    const FuzzyPartition p({0, 25, 50}, {0, 50});
    CHECK(p.rule_count() == 6);
}

TEST_CASE("inferred action") {
    QTable table;
    const FuzzyPartition p;
    RuleSelection all_five(25, 1);  // stored action 5
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 50);
    for (int i = 0; i < 100; ++i) {
        CHECK(infer_action(table, truth_values(p, {u(rng), u(rng)}), all_five) == doctest::Approx(5.0));
    }

    std::vector<double> alpha(25, 0.0);
    alpha[3] = 0.2;
    alpha[4] = 0.8;
    RuleSelection sel(25, 0);
    sel[3] = 0;   // 0
    sel[4] = 10;  // 50
    CHECK(infer_action(table, make_truth(alpha), sel) == doctest::Approx(40.0));

    sel[7] = 6;
    CHECK(infer_action(table, truth_values(p, {12.5, 25}), sel) == 30.0);
}

TEST_CASE("inferred q") {
    QTable table;
    RuleSelection sel(25, 0);
    const FuzzyPartition p;
    CHECK(infer_q(table, truth_values(p, {3, 44}), sel) == 0.0);

    table.q(7, 2) = 7.5;
    sel[7] = 2;
    CHECK(infer_q(table, truth_values(p, {12.5, 25}), sel) == 7.5);

    std::vector<double> alpha(25, 0.0);
    alpha[0] = 0.25;
    alpha[1] = 0.75;
    table.q(0, 0) = 4.0;
    table.q(1, 0) = 8.0;
    CHECK(infer_q(table, make_truth(alpha), sel) == doctest::Approx(7.0));
}

TEST_CASE("inference is bounded by the selected entries") {
    QTable table;
    const FuzzyPartition p;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 50);
    std::uniform_real_distribution<double> qv(-100, 100);
    std::uniform_int_distribution<std::size_t> k(0, 10);
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t a = 0; a < 11; ++a) table.q(i, a) = qv(rng);
    for (int n = 0; n < 500; ++n) {
        RuleSelection sel(25);
        for (auto& s : sel) s = k(rng);
        const auto t = truth_values(p, {u(rng), u(rng)});
        double lo_a = 1e300, hi_a = -1e300, lo_q = 1e300, hi_q = -1e300;
        for (auto i : t.active) {
            lo_a = std::min(lo_a, table.stored_actions()[sel[i]]);
            hi_a = std::max(hi_a, table.stored_actions()[sel[i]]);
            lo_q = std::min(lo_q, table.q(i, sel[i]));
            hi_q = std::max(hi_q, table.q(i, sel[i]));
        }
        const double a = infer_action(table, t, sel);
        const double q = infer_q(table, t, sel);
        CHECK(a >= lo_a - 1e-9);
        CHECK(a <= hi_a + 1e-9);
        CHECK(q >= lo_q - 1e-9);
        CHECK(q <= hi_q + 1e-9);
    }
}

TEST_CASE("td error") {
    QTable table;
    const FuzzyPartition p;
    const auto t = truth_values(p, {20, 30});
    CHECK(td_error(0.0, 12.0, t, table, 0.5, 0.0) == doctest::Approx(6.0));
    CHECK(td_error(3.0, 3.0, t, table, 0.5, 0.0) == 0.0);
    CHECK(td_error(0.0, 10.0, t, table, 0.5, 0.9) == doctest::Approx(5.0));

    // discounted target uses raw per-rule maxima
    for (std::size_t i = 0; i < 25; ++i) table.q(i, i % 11) = 2.0;
    CHECK(td_error(1.0, 10.0, t, table, 0.5, 0.9) == doctest::Approx(0.5 * (10.0 + 0.9 * 2.0 - 1.0)));
}

TEST_CASE("update touches only active rules") {
    QTable table;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> qv(-5, 5);
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t a = 0; a < 11; ++a) table.q(i, a) = qv(rng);
    const QTable before = table;

    std::vector<double> alpha(25, 0.0);
    alpha[10] = 0.2;
    alpha[11] = 0.8;
    RuleSelection sel(25, 3);
    update(table, make_truth(alpha), sel, 1.0);
    for (std::size_t i = 0; i < 25; ++i) {
        for (std::size_t a = 0; a < 11; ++a) {
            if ((i == 10 || i == 11) && a == 3) continue;
            CHECK(table.q(i, a) == before.q(i, a));
        }
    }
    CHECK(table.q(10, 3) == doctest::Approx(before.q(10, 3) + 0.2));
    CHECK(table.q(11, 3) == doctest::Approx(before.q(11, 3) + 0.8));

    QTable single;
    std::vector<double> one(25, 0.0);
    one[6] = 1.0;
    update(single, make_truth(one), sel, 2.5);
    CHECK(single.q(6, 3) == 2.5);
    CHECK(single.q_sum() == 2.5);
}

TEST_CASE("constant reward converges geometrically") {
    QTable table;
    const FuzzyPartition p;
    const auto t = truth_values(p, {25, 37.5});
    RuleSelection sel(25, 4);
    const double reward = 17.0;
    double err_prev = reward;
    for (int k = 0; k < 60; ++k) {
        const double q_old = infer_q(table, t, sel);
        update(table, t, sel, td_error(q_old, reward, t, table, 0.5, 0.0));
        const double err = std::abs(reward - infer_q(table, t, sel));
        CHECK(err == doctest::Approx(err_prev / 2.0));
        err_prev = err;
    }
    CHECK(infer_q(table, t, sel) == doctest::Approx(reward));
}

TEST_CASE("q-table csv") {
    QTable table(2, {0, 10});
    table.q(1, 1) = 0.1;
    table.record_visit(1, 1);
    std::ostringstream out;
    table.write_csv(out);
    CHECK(out.str() ==
          "rule,action_index,stored_action,q,visits\n0,0,0,0,0\n0,1,10,0,0\n1,0,0,0,0\n1,1,10,0.10000000000000001,1\n");
}
