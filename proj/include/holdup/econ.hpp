#pragma once

// Economic primitives of the two-division hold-up model and the closed-form
// first-best / second-best equilibria.
//
// All quantities are in the model's abstract currency units. Investment costs
// are quadratic, w_j(I) = lambda_j * I^2 / 2, and the contribution margin is
// split between the divisions by the surplus sharing parameter (the seller's
// share).

namespace holdup::econ {

struct EconParams {
    double b = 12.0;               // slope of inverse demand
    double lambda_s = 0.5;         // seller's marginal investment cost
    double lambda_b = 0.5;         // buyer's marginal investment cost
    double mean_theta_s = 60.0;
    double mean_theta_b = 100.0;
    double sd_theta_s = 0.0;
    double sd_theta_b = 0.0;
    double gamma_share = 0.5;      // seller's share of the margin

    double mean_spread() const { return mean_theta_b - mean_theta_s; }
    // theta_s and theta_b are independent.
    double spread_variance() const { return sd_theta_s * sd_theta_s + sd_theta_b * sd_theta_b; }
};

/// Throws std::invalid_argument naming the first violated constraint. Besides
/// basic positivity this requires b*lambda_s*lambda_b > lambda_s + lambda_b and
/// b*lambda_j > 1, without which the closed forms are not finite and positive.
void validate(const EconParams& econ);

struct Realization {
    double theta_s = 0.0;
    double theta_b = 0.0;
    double inv_s = 0.0;
    double inv_b = 0.0;
};

struct DivisionProfits {
    double seller = 0.0;
    double buyer = 0.0;
};

struct EquilibriumSolution {
    double inv_s = 0.0;
    double inv_b = 0.0;
    double quantity = 0.0;
    double profit_s = 0.0;
    double profit_b = 0.0;
    double profit_hq = 0.0;
    double gamma_used = 0.0;
};

double seller_cost(double quantity, double theta_s, double inv_s);
double buyer_revenue(double quantity, double theta_b, double inv_b, double b);
double investment_cost(double lambda, double inv);

/// Ex-post efficient quantity, clamped at zero when the realized spread plus
/// investments is negative.
double efficient_quantity(double theta_s, double theta_b, double inv_s, double inv_b, double b);

double contribution_margin(const Realization& r, const EconParams& econ);
DivisionProfits division_profits(const Realization& r, const EconParams& econ);
double hq_profit(const Realization& r, const EconParams& econ);

/// Headquarters-optimal investments. Division profits are evaluated at the
/// equilibrium point using econ.gamma_share.
EquilibriumSolution first_best(const EconParams& econ);

/// Surplus share that maximizes expected headquarters profit when divisions
/// invest selfishly: (b*lambda_b - 1) / (b*(lambda_s + lambda_b) - 2).
double gamma_second_best(const EconParams& econ);

/// Selfish equilibrium under gamma_second_best(econ); econ.gamma_share is ignored.
EquilibriumSolution second_best(const EconParams& econ);

/// Selfish equilibrium for an arbitrary share. Solves the two best-response
/// conditions as a 2x2 linear system; throws std::domain_error when the system
/// is singular or has no non-negative solution.
EquilibriumSolution second_best_at_gamma(const EconParams& econ, double gamma);

}  // namespace holdup::econ
