#pragma once

// Zero-order Takagi-Sugeno fuzzy Q-function over a two-dimensional state
// (seller's and buyer's previous investment).
//
// Each dimension is covered by triangular membership functions peaking at the
// partition centers; neighbouring triangles overlap so that memberships sum to
// one everywhere (a strong partition). A rule is one (seller label, buyer label)
// pair; its truth value is the product of the two memberships. Every rule holds
// the same K stored candidate actions with one q-value each.
//
// Rule numbering is seller-major: rule = seller_label * buyer_labels + buyer_label.
// Action indices are 0-based.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace holdup::fuzzy {

class FuzzyPartition {
public:
    /// Default grid {0, 12.5, 25, 37.5, 50} in both dimensions.
    FuzzyPartition();
    FuzzyPartition(std::vector<double> seller_centers, std::vector<double> buyer_centers);

    std::size_t rule_count() const { return seller_.size() * buyer_.size(); }
    std::size_t buyer_labels() const { return buyer_.size(); }
    const std::vector<double>& seller_centers() const { return seller_; }
    const std::vector<double>& buyer_centers() const { return buyer_; }
    double lower() const { return seller_.front(); }
    double upper() const { return seller_.back(); }

    /// Membership grades of every label along one dimension (0 = seller, 1 = buyer).
    /// Values outside the hull are clamped to the outermost center.
    std::vector<double> memberships(int dimension, double value) const;

private:
    std::vector<double> seller_;
    std::vector<double> buyer_;
};

struct StateVector {
    double seller = 0.0;
    double buyer = 0.0;

    /// Clamps both components into [lo, hi].
    static StateVector clamped(double seller, double buyer, double lo, double hi);
};

/// Dense truth values plus the (at most four) rules with non-zero weight.
struct TruthValues {
    std::vector<double> alpha;
    std::vector<std::size_t> active;
};

/// Wraps an explicit weight vector, deriving the active list from non-zero entries.
TruthValues make_truth(std::vector<double> alpha);

TruthValues truth_values(const FuzzyPartition& partition, StateVector state);
/// Allocation-free variant for the simulation loop; `out` is resized on demand.
void truth_values(const FuzzyPartition& partition, StateVector state, TruthValues& out);

class QTable {
public:
    /// Stored actions default to {0, 5, ..., 50}.
    explicit QTable(std::size_t rules = 25);
    QTable(std::size_t rules, std::vector<double> stored_actions);

    std::size_t rules() const { return rules_; }
    std::size_t actions() const { return stored_.size(); }
    const std::vector<double>& stored_actions() const { return stored_; }

    double q(std::size_t rule, std::size_t action) const { return q_[rule * stored_.size() + action]; }
    double& q(std::size_t rule, std::size_t action) { return q_[rule * stored_.size() + action]; }
    std::span<const double> q_row(std::size_t rule) const;

    std::uint32_t visits(std::size_t rule, std::size_t action) const { return visits_[rule * stored_.size() + action]; }
    std::span<const std::uint32_t> visits_row(std::size_t rule) const;
    void record_visit(std::size_t rule, std::size_t action) { ++visits_[rule * stored_.size() + action]; }

    double row_max(std::size_t rule) const;
    double q_sum() const;

    /// Columns: rule,action_index,stored_action,q,visits
    void write_csv(std::ostream& out) const;

private:
    std::size_t rules_;
    std::vector<double> stored_;
    std::vector<double> q_;
    std::vector<std::uint32_t> visits_;
};

/// Per-rule chosen action index. Entries for rules with zero truth are never read.
using RuleSelection = std::vector<std::size_t>;

/// Truth-weighted combination of the selected stored actions.
double infer_action(const QTable& table, const TruthValues& truth, const RuleSelection& selection);

/// Truth-weighted combination of the selected q-values.
double infer_q(const QTable& table, const TruthValues& truth, const RuleSelection& selection);

/// learning_rate * (reward + discount * sum_i next_alpha_i * max_k q[i,k] - q_old)
double td_error(double q_old, double reward, const TruthValues& next_truth, const QTable& table,
                double learning_rate, double discount);

/// q[i, selection_i] += alpha_i * delta for every rule with non-zero truth.
void update(QTable& table, const TruthValues& truth, const RuleSelection& selection, double delta);

}  // namespace holdup::fuzzy
