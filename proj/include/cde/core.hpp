#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cde {

/// Thrown for invalid configurations: bad names, mismatched dimensions,
/// out-of-range parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an evaluation is requested after the FE budget is spent.
/// The engine treats it as a termination signal.
class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a result grid lacks a cell that an aggregation needs.
class MissingDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using DecisionVector = std::vector<double>;

/// Box constraints lb_j < ub_j for every dimension.
class Bounds {
public:
    Bounds(std::vector<double> lower, std::vector<double> upper);

    /// Same interval in every one of `dimension` coordinates.
    static Bounds uniform(std::size_t dimension, double lower, double upper);

    std::size_t dimension() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    double lower(std::size_t j) const { return lower_[j]; }
    double upper(std::size_t j) const { return upper_[j]; }
    double width(std::size_t j) const { return upper_[j] - lower_[j]; }

    bool contains(std::span<const double> v) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

struct Evaluation {
    double objective = 0.0;
    double violation = 0.0;  // sum of positive constraint values, 0 when feasible
    std::uint64_t fe_index = 0;

    bool feasible() const noexcept { return violation == 0.0; }
};

struct Individual {
    DecisionVector vector;
    Evaluation eval;
};

struct Population {
    std::vector<Individual> members;
    std::uint64_t generation = 0;

    std::size_t size() const noexcept { return members.size(); }
    const Individual& operator[](std::size_t i) const { return members[i]; }
    Individual& operator[](std::size_t i) { return members[i]; }

    /// Index of the best member under compare_fitness; first wins ties.
    std::size_t best_index() const;
};

enum class Ordering { a_better, b_better, tie };

/// Feasibility-rule ordering: feasible beats infeasible, feasible pairs by
/// objective, infeasible pairs by violation. Evaluations with a non-finite
/// objective or violation rank below every finite one and tie each other.
Ordering compare_fitness(const Evaluation& a, const Evaluation& b) noexcept;

/// True when `a` is strictly better than `b`.
inline bool better(const Evaluation& a, const Evaluation& b) noexcept {
    return compare_fitness(a, b) == Ordering::a_better;
}

/// Clamps every component into [lb_j, ub_j].
DecisionVector repair_to_bounds(std::span<const double> v, const Bounds& bounds);

std::string to_string(Ordering o);

}  // namespace cde
