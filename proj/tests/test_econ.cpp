#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "holdup/econ.hpp"

using namespace holdup::econ;

namespace {

EconParams with_lambda(double ls, double lb, double gamma = 0.5) {
    EconParams e;
    e.lambda_s = ls;
    e.lambda_b = lb;
    e.gamma_share = gamma;
    return e;
}

// Coordinate ascent on expected HQ profit using only the first-order
// conditions of the expected margin ((E + I_S + I_B)^2 + Var) / (2b).
void first_best_by_iteration(const EconParams& e, double& is, double& ib) {
    is = ib = 0.0;
    const double spread = e.mean_theta_b - e.mean_theta_s;
    for (int k = 0; k < 20000; ++k) {
        is = (spread + ib) / (e.b * e.lambda_s - 1.0);
        ib = (spread + is) / (e.b * e.lambda_b - 1.0);
    }
}

// Best-response iteration for the selfish game at share g.
void second_best_by_iteration(const EconParams& e, double g, double& is, double& ib) {
    is = ib = 0.0;
    const double spread = e.mean_theta_b - e.mean_theta_s;
    for (int k = 0; k < 2000; ++k) {
        is = g * (spread + ib) / (e.b * e.lambda_s - g);
        ib = (1.0 - g) * (spread + is) / (e.b * e.lambda_b - (1.0 - g));
    }
}

}  // namespace

TEST_CASE("seller cost and buyer revenue") {
    CHECK(seller_cost(0.0, 60, 10) == 0.0);
    CHECK(seller_cost(5.0, 60, 10) == doctest::Approx(250.0));
    CHECK(buyer_revenue(4.0, 100, 4, 12) == doctest::Approx(320.0));
    CHECK(buyer_revenue(0.0, 100, 4, 12) == 0.0);
    CHECK(buyer_revenue(5.0, 100, 10, 12) == doctest::Approx(400.0));
    CHECK(investment_cost(0.5, 4.0) == doctest::Approx(4.0));
}

TEST_CASE("efficient quantity") {
    CHECK(efficient_quantity(60, 100, 4, 4, 12) == doctest::Approx(4.0));
    CHECK(efficient_quantity(100, 100, 0, 0, 12) == 0.0);
    CHECK(efficient_quantity(60, 100, 10, 50, 12) == doctest::Approx(100.0 / 12.0));
    CHECK(efficient_quantity(150, 100, 0, 0, 12) == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-200, 200);
    for (int i = 0; i < 1000; ++i) CHECK(efficient_quantity(u(rng), u(rng), u(rng), u(rng), 12) >= 0.0);
}

TEST_CASE("margin and division profits") {
    const EconParams e;
    CHECK(contribution_margin({60, 100, 4, 4}, e) == doctest::Approx(96.0));
    CHECK(contribution_margin({100, 100, 0, 0}, e) == 0.0);
    CHECK(contribution_margin({60, 100, 10, 10}, e) == doctest::Approx(150.0));

    const auto p = division_profits({60, 100, 4, 4}, e);
    CHECK(p.seller == doctest::Approx(44.0));
    CHECK(p.buyer == doctest::Approx(44.0));
    const auto z = division_profits({80, 80, 0, 0}, e);
    CHECK(z.seller == 0.0);
    CHECK(z.buyer == 0.0);

    const auto skewed = with_lambda(5.0 / 6.0, 1.0 / 6.0, 0.1);
    const auto q = division_profits({60, 100, 20.0 / 27.0, 100.0 / 3.0}, skewed);
    CHECK(q.seller == doctest::Approx(22.63).epsilon(0.001));
    CHECK(q.buyer == doctest::Approx(113.17).epsilon(0.001));

    CHECK(hq_profit({60, 100, 4, 4}, e) == doctest::Approx(88.0));
    CHECK(hq_profit({50, 50, 0, 0}, e) == 0.0);
    CHECK(hq_profit({60, 100, 10, 10}, e) == doctest::Approx(100.0));
}

TEST_CASE("hq profit is exactly the sum of division profits") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> theta(0, 150);
    std::uniform_real_distribution<double> inv(0, 50);
    std::uniform_real_distribution<double> share(0, 1);
    for (int i = 0; i < 2000; ++i) {
        auto e = with_lambda(0.5, 0.5, share(rng));
        const Realization r{theta(rng), theta(rng), inv(rng), inv(rng)};
        const auto p = division_profits(r, e);
        CHECK(hq_profit(r, e) == p.seller + p.buyer);
    }
}

TEST_CASE("first-best solutions") {
    const auto sym = first_best(EconParams{});
    CHECK(sym.inv_s == doctest::Approx(10.0));
    CHECK(sym.inv_b == doctest::Approx(10.0));
    CHECK(sym.quantity == doctest::Approx(5.0));
    CHECK(sym.profit_hq == doctest::Approx(100.0));

    const auto skew = first_best(with_lambda(5.0 / 6.0, 1.0 / 6.0, 0.1));
    CHECK(skew.inv_s == doctest::Approx(10.0));
    CHECK(skew.inv_b == doctest::Approx(50.0));
    CHECK(skew.quantity == doctest::Approx(25.0 / 3.0));
    CHECK(skew.profit_hq == doctest::Approx(500.0 / 3.0));

    EconParams noisy;
    noisy.sd_theta_s = noisy.sd_theta_b = 10.0;
    CHECK(first_best(noisy).profit_hq - sym.profit_hq == doctest::Approx(200.0 / 24.0));

    const double ls_grid[] = {1.0 / 2, 7.0 / 12, 2.0 / 3, 3.0 / 4, 5.0 / 6};
    for (double ls : ls_grid) {
        for (double lb : ls_grid) {
            const auto e = with_lambda(ls, lb);
            double is = 0.0;
            double ib = 0.0;
            first_best_by_iteration(e, is, ib);
            const auto fb = first_best(e);
            CHECK(fb.inv_s == doctest::Approx(is).epsilon(1e-9));
            CHECK(fb.inv_b == doctest::Approx(ib).epsilon(1e-9));
        }
    }
}

TEST_CASE("first-best profit decreases in each investment cost") {
    const double grid[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    for (double fixed : grid) {
        double prev_s = INFINITY;
        double prev_b = INFINITY;
        for (double l : grid) {
            const double ps = first_best(with_lambda(l, fixed)).profit_hq;
            const double pb = first_best(with_lambda(fixed, l)).profit_hq;
            CHECK(ps < prev_s);
            CHECK(pb < prev_b);
            prev_s = ps;
            prev_b = pb;
        }
    }
}

TEST_CASE("optimal surplus share") {
    CHECK(gamma_second_best(EconParams{}) == doctest::Approx(0.5));
    CHECK(gamma_second_best(with_lambda(5.0 / 6.0, 1.0 / 6.0)) == doctest::Approx(0.1));
    const double grid[] = {1.0 / 2, 7.0 / 12, 2.0 / 3, 3.0 / 4, 5.0 / 6};
    for (double ls : grid) {
        const double g = gamma_second_best(with_lambda(ls, 1.0 - ls));
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        for (double lb : grid) {
            CHECK(gamma_second_best(with_lambda(ls, lb)) ==
                  doctest::Approx(1.0 - gamma_second_best(with_lambda(lb, ls))));
        }
    }
}

TEST_CASE("second-best solutions") {
    const auto sym = second_best(EconParams{});
    CHECK(sym.inv_s == doctest::Approx(4.0));
    CHECK(sym.inv_b == doctest::Approx(4.0));
    CHECK(sym.quantity == doctest::Approx(4.0));
    CHECK(sym.profit_hq == doctest::Approx(88.0));
    CHECK(sym.profit_s == doctest::Approx(44.0));
    CHECK(sym.profit_b == doctest::Approx(44.0));
    CHECK(sym.profit_hq == sym.profit_s + sym.profit_b);

    const auto skew = second_best(with_lambda(5.0 / 6.0, 1.0 / 6.0));
    CHECK(skew.inv_s == doctest::Approx(0.74).epsilon(0.01));
    CHECK(skew.inv_b == doctest::Approx(33.33).epsilon(0.001));
    CHECK(skew.profit_hq == doctest::Approx(135.80).epsilon(0.0001));

    const double grid[] = {1.0 / 6, 1.0 / 4, 1.0 / 3, 5.0 / 12, 1.0 / 2, 7.0 / 12, 2.0 / 3, 3.0 / 4, 5.0 / 6};
    for (double ls : grid) {
        const auto e = with_lambda(ls, 1.0 - ls);
        CHECK(second_best(e).profit_hq < first_best(e).profit_hq);
    }
}

TEST_CASE("second best at an arbitrary share") {
    const auto e = EconParams{};
    const auto at_opt = second_best_at_gamma(e, gamma_second_best(e));
    const auto sb = second_best(e);
    CHECK(at_opt.inv_s == doctest::Approx(sb.inv_s));
    CHECK(at_opt.inv_b == doctest::Approx(sb.inv_b));
    CHECK(at_opt.profit_hq == doctest::Approx(sb.profit_hq));

    const auto skewed = with_lambda(5.0 / 6.0, 1.0 / 6.0);
    const auto at_skew = second_best_at_gamma(skewed, 0.1);
    CHECK(at_skew.inv_s == doctest::Approx(second_best(skewed).inv_s));
    CHECK(at_skew.inv_b == doctest::Approx(second_best(skewed).inv_b));

    CHECK(second_best_at_gamma(e, 1.0).inv_b == doctest::Approx(0.0));
    CHECK(second_best_at_gamma(e, 0.0).inv_s == doctest::Approx(0.0));

    for (double g : {0.2, 0.4, 0.6, 0.8}) {
        double is = 0.0;
        double ib = 0.0;
        second_best_by_iteration(e, g, is, ib);
        const auto s = second_best_at_gamma(e, g);
        CHECK(s.inv_s == doctest::Approx(is).epsilon(1e-10));
        CHECK(s.inv_b == doctest::Approx(ib).epsilon(1e-10));
        CHECK(s.gamma_used == g);
    }
}

TEST_CASE("invalid parameters are rejected") {
    EconParams e;
    e.b = 0.0;
    CHECK_THROWS_AS(validate(e), std::invalid_argument);
    e = with_lambda(0.1, 0.1);  // b*ls*lb < ls + lb
    CHECK_THROWS_AS(validate(e), std::invalid_argument);
    e = EconParams{};
    e.sd_theta_s = -1.0;
    CHECK_THROWS_AS(validate(e), std::invalid_argument);
    CHECK_NOTHROW(validate(EconParams{}));
}
