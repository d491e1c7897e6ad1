#include "holdup/fuzzy.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace holdup::fuzzy {

namespace {

void check_centers(const std::vector<double>& c, const char* name) {
    if (c.size() < 2) throw std::invalid_argument(std::string(name) + ": need at least two centers");
    for (std::size_t i = 1; i < c.size(); ++i) {
        if (!(c[i] > c[i - 1])) throw std::invalid_argument(std::string(name) + ": centers must be strictly increasing");
    }
}

// Index of the left center of the segment containing v and the membership of
// the right center. v must already be clamped to the hull.
std::pair<std::size_t, double> locate(const std::vector<double>& c, double v) {
    if (v <= c.front()) return {0, 0.0};
    if (v >= c.back()) return {c.size() - 2, 1.0};
    const auto it = std::upper_bound(c.begin(), c.end(), v);
    const std::size_t right = static_cast<std::size_t>(it - c.begin());
    const std::size_t left = right - 1;
    return {left, (v - c[left]) / (c[right] - c[left])};
}

}  // namespace

FuzzyPartition::FuzzyPartition() : FuzzyPartition({0.0, 12.5, 25.0, 37.5, 50.0}, {0.0, 12.5, 25.0, 37.5, 50.0}) {}

FuzzyPartition::FuzzyPartition(std::vector<double> seller_centers, std::vector<double> buyer_centers)
    : seller_(std::move(seller_centers)), buyer_(std::move(buyer_centers)) {
    check_centers(seller_, "seller partition");
    check_centers(buyer_, "buyer partition");
    if (seller_.front() != buyer_.front() || seller_.back() != buyer_.back()) {
        throw std::invalid_argument("partition dimensions must share the same hull");
    }
}

std::vector<double> FuzzyPartition::memberships(int dimension, double value) const {
    const auto& c = dimension == 0 ? seller_ : buyer_;
    std::vector<double> mu(c.size(), 0.0);
    const auto [left, right_weight] = locate(c, std::clamp(value, c.front(), c.back()));
    mu[left] += 1.0 - right_weight;
    mu[left + 1] += right_weight;
    return mu;
}

StateVector StateVector::clamped(double seller, double buyer, double lo, double hi) {
    return {std::clamp(seller, lo, hi), std::clamp(buyer, lo, hi)};
}

void truth_values(const FuzzyPartition& partition, StateVector state, TruthValues& out) {
    const auto& cs = partition.seller_centers();
    const auto& cb = partition.buyer_centers();
    out.alpha.assign(partition.rule_count(), 0.0);
    out.active.clear();

    const auto [ls, ws] = locate(cs, std::clamp(state.seller, cs.front(), cs.back()));
    const auto [lb, wb] = locate(cb, std::clamp(state.buyer, cb.front(), cb.back()));
    const double mu_s[2] = {1.0 - ws, ws};
    const double mu_b[2] = {1.0 - wb, wb};
    const std::size_t nb = partition.buyer_labels();
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double a = mu_s[i] * mu_b[j];
            if (a > 0.0) {
                const std::size_t rule = (ls + i) * nb + (lb + j);
                out.alpha[rule] = a;
                out.active.push_back(rule);
            }
        }
    }
}

TruthValues make_truth(std::vector<double> alpha) {
    TruthValues t;
    t.alpha = std::move(alpha);
    for (std::size_t i = 0; i < t.alpha.size(); ++i) {
        if (t.alpha[i] != 0.0) t.active.push_back(i);
    }
    return t;
}

TruthValues truth_values(const FuzzyPartition& partition, StateVector state) {
    TruthValues t;
    truth_values(partition, state, t);
    return t;
}

QTable::QTable(std::size_t rules) : QTable(rules, {0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50}) {}

QTable::QTable(std::size_t rules, std::vector<double> stored_actions)
    : rules_(rules), stored_(std::move(stored_actions)) {
    if (rules_ == 0 || stored_.empty()) throw std::invalid_argument("q-table needs at least one rule and one action");
    for (std::size_t k = 1; k < stored_.size(); ++k) {
        if (!(stored_[k] > stored_[k - 1])) throw std::invalid_argument("stored actions must be strictly increasing");
    }
    q_.assign(rules_ * stored_.size(), 0.0);
    visits_.assign(rules_ * stored_.size(), 0);
}

std::span<const double> QTable::q_row(std::size_t rule) const {
    return {q_.data() + rule * stored_.size(), stored_.size()};
}

std::span<const std::uint32_t> QTable::visits_row(std::size_t rule) const {
    return {visits_.data() + rule * stored_.size(), stored_.size()};
}

double QTable::row_max(std::size_t rule) const {
    const auto row = q_row(rule);
    return *std::max_element(row.begin(), row.end());
}

double QTable::q_sum() const {
    double s = 0.0;
    for (double v : q_) s += v;
    return s;
}

void QTable::write_csv(std::ostream& out) const {
    out << "rule,action_index,stored_action,q,visits\n";
    char buf[128];
    for (std::size_t i = 0; i < rules_; ++i) {
        for (std::size_t k = 0; k < stored_.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%u\n", i, k, stored_[k], q(i, k), visits(i, k));
            out << buf;
        }
    }
}

double infer_action(const QTable& table, const TruthValues& truth, const RuleSelection& selection) {
    double a = 0.0;
    for (std::size_t i : truth.active) a += truth.alpha[i] * table.stored_actions()[selection[i]];
    return a;
}

double infer_q(const QTable& table, const TruthValues& truth, const RuleSelection& selection) {
    double q = 0.0;
    for (std::size_t i : truth.active) q += truth.alpha[i] * table.q(i, selection[i]);
    return q;
}

double td_error(double q_old, double reward, const TruthValues& next_truth, const QTable& table,
                double learning_rate, double discount) {
    double future = 0.0;
    if (discount != 0.0) {
        for (std::size_t i : next_truth.active) future += next_truth.alpha[i] * table.row_max(i);
    }
    return learning_rate * (reward + discount * future - q_old);
}

void update(QTable& table, const TruthValues& truth, const RuleSelection& selection, double delta) {
    for (std::size_t i : truth.active) table.q(i, selection[i]) += truth.alpha[i] * delta;
}

}  // namespace holdup::fuzzy
