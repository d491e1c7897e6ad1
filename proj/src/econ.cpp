#include "holdup/econ.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace holdup::econ {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid economic parameters: ") + what);
}

// Expected margin E[(dtheta + I)^2 / (2b)] for fixed total investment.
double expected_margin(const EconParams& econ, double total_inv) {
    const double level = econ.mean_spread() + total_inv;
    return (level * level + econ.spread_variance()) / (2.0 * econ.b);
}

EquilibriumSolution evaluate(const EconParams& econ, double inv_s, double inv_b, double gamma) {
    EquilibriumSolution s;
    s.inv_s = inv_s;
    s.inv_b = inv_b;
    s.quantity = (econ.mean_spread() + inv_s + inv_b) / econ.b;
    s.gamma_used = gamma;
    const double margin = expected_margin(econ, inv_s + inv_b);
    const double w_s = investment_cost(econ.lambda_s, inv_s);
    const double w_b = investment_cost(econ.lambda_b, inv_b);
    s.profit_s = gamma * margin - w_s;
    s.profit_b = (1.0 - gamma) * margin - w_b;
    s.profit_hq = s.profit_s + s.profit_b;
    return s;
}

}  // namespace

void validate(const EconParams& econ) {
    require(std::isfinite(econ.b) && econ.b > 0.0, "b must be positive");
    require(std::isfinite(econ.lambda_s) && econ.lambda_s > 0.0, "lambda_s must be positive");
    require(std::isfinite(econ.lambda_b) && econ.lambda_b > 0.0, "lambda_b must be positive");
    require(std::isfinite(econ.mean_theta_s) && std::isfinite(econ.mean_theta_b),
            "expected state variables must be finite");
    require(econ.sd_theta_s >= 0.0 && econ.sd_theta_b >= 0.0, "standard deviations must be non-negative");
    require(econ.gamma_share >= 0.0 && econ.gamma_share <= 1.0, "gamma_share must lie in [0,1]");
    require(econ.b * econ.lambda_s * econ.lambda_b - econ.lambda_s - econ.lambda_b > 0.0,
            "b*lambda_s*lambda_b - lambda_s - lambda_b must be positive");
    require(econ.b * econ.lambda_s > 1.0, "b*lambda_s must exceed 1");
    require(econ.b * econ.lambda_b > 1.0, "b*lambda_b must exceed 1");
}

double seller_cost(double quantity, double theta_s, double inv_s) {
    return (theta_s - inv_s) * quantity;
}

double buyer_revenue(double quantity, double theta_b, double inv_b, double b) {
    return (theta_b - 0.5 * b * quantity + inv_b) * quantity;
}

double investment_cost(double lambda, double inv) {
    return 0.5 * lambda * inv * inv;
}

double efficient_quantity(double theta_s, double theta_b, double inv_s, double inv_b, double b) {
    return std::max(0.0, (theta_b - theta_s + inv_s + inv_b) / b);
}

double contribution_margin(const Realization& r, const EconParams& econ) {
    const double q = efficient_quantity(r.theta_s, r.theta_b, r.inv_s, r.inv_b, econ.b);
    return buyer_revenue(q, r.theta_b, r.inv_b, econ.b) - seller_cost(q, r.theta_s, r.inv_s);
}

DivisionProfits division_profits(const Realization& r, const EconParams& econ) {
    const double m = contribution_margin(r, econ);
    return {econ.gamma_share * m - investment_cost(econ.lambda_s, r.inv_s),
            (1.0 - econ.gamma_share) * m - investment_cost(econ.lambda_b, r.inv_b)};
}

double hq_profit(const Realization& r, const EconParams& econ) {
    const auto p = division_profits(r, econ);
    return p.seller + p.buyer;
}

EquilibriumSolution first_best(const EconParams& econ) {
    validate(econ);
    const double ls = econ.lambda_s;
    const double lb = econ.lambda_b;
    // I_j = E[q]/lambda_j together with E[q] = (E[dtheta] + I_s + I_b)/b.
    const double quantity = ls * lb * econ.mean_spread() / (econ.b * ls * lb - ls - lb);
    return evaluate(econ, quantity / ls, quantity / lb, econ.gamma_share);
}

double gamma_second_best(const EconParams& econ) {
    const double denom = econ.b * (econ.lambda_s + econ.lambda_b) - 2.0;
    if (!(denom > 0.0)) {
        throw std::invalid_argument("invalid economic parameters: b*(lambda_s+lambda_b) must exceed 2");
    }
    return (econ.b * econ.lambda_b - 1.0) / denom;
}

EquilibriumSolution second_best(const EconParams& econ) {
    validate(econ);
    const double ls = econ.lambda_s;
    const double lb = econ.lambda_b;
    const double spread = econ.mean_spread();
    const double inv_s = lb * spread / ((econ.b * ls - 1.0) * (ls + lb));
    const double inv_b = ls * spread / ((econ.b * lb - 1.0) * (ls + lb));
    return evaluate(econ, inv_s, inv_b, gamma_second_best(econ));
}

EquilibriumSolution second_best_at_gamma(const EconParams& econ, double gamma) {
    validate(econ);
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::domain_error("gamma must lie in [0,1]");
    // (b*ls - G) I_s - G I_b = G*E ; -(1-G) I_s + (b*lb - (1-G)) I_b = (1-G)*E
    const double g_s = gamma;
    const double g_b = 1.0 - gamma;
    const double a11 = econ.b * econ.lambda_s - g_s;
    const double a12 = -g_s;
    const double a21 = -g_b;
    const double a22 = econ.b * econ.lambda_b - g_b;
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-12)) throw std::domain_error("best-response system is singular");
    const double rhs_s = g_s * econ.mean_spread();
    const double rhs_b = g_b * econ.mean_spread();
    const double inv_s = (rhs_s * a22 - a12 * rhs_b) / det;
    const double inv_b = (a11 * rhs_b - a21 * rhs_s) / det;
    if (inv_s < 0.0 || inv_b < 0.0) throw std::domain_error("best-response system has no non-negative solution");
    return evaluate(econ, inv_s, inv_b, gamma);
}

}  // namespace holdup::econ
