#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cde/core.hpp"

namespace cde {

/// Constraint values at or below this count as satisfied.
inline constexpr double kFeasibilityTolerance = 1e-9;

using ScalarFunction = std::function<double(std::span<const double>)>;

/// A minimization problem: objective, inequality constraints g_i(x) <= 0,
/// box bounds and an optional per-dimension integrality mask. Immutable after
/// construction and safe to share between threads.
class Problem {
public:
    Problem(std::string name, Bounds bounds, ScalarFunction objective,
            std::vector<ScalarFunction> constraints = {}, std::vector<bool> integer_mask = {},
            std::optional<double> known_best = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    std::size_t dimension() const noexcept { return bounds_.dimension(); }
    const Bounds& bounds() const noexcept { return bounds_; }
    const std::vector<bool>& integer_mask() const noexcept { return integer_mask_; }
    std::size_t constraint_count() const noexcept { return constraints_.size(); }
    std::optional<double> known_best() const noexcept { return known_best_; }
    bool has_integer_dimensions() const noexcept;

    /// The point the formulas actually see: integer dimensions rounded to the
    /// nearest integer (halves toward +inf) and re-clamped to the bounds.
    DecisionVector effective_point(std::span<const double> v) const;

    /// Raw g_i values at the effective point.
    std::vector<double> constraint_values(std::span<const double> v) const;

    /// Objective and aggregate violation without touching any budget.
    /// fe_index is left at 0.
    Evaluation evaluate_uncounted(std::span<const double> v) const;

private:
    std::string name_;
    Bounds bounds_;
    ScalarFunction objective_;
    std::vector<ScalarFunction> constraints_;
    std::vector<bool> integer_mask_;
    std::optional<double> known_best_;
};

/// Single-owner FE counter for one trial.
class EvaluationBudget {
public:
    explicit EvaluationBudget(std::uint64_t max_fe);

    std::uint64_t max_fe() const noexcept { return max_fe_; }
    std::uint64_t used_fe() const noexcept { return used_fe_; }
    std::uint64_t remaining() const noexcept { return max_fe_ - used_fe_; }
    bool exhausted() const noexcept { return used_fe_ >= max_fe_; }

    /// Consumes one FE and returns its 1-based index; throws BudgetExhausted
    /// when none remain.
    std::uint64_t consume();

private:
    std::uint64_t max_fe_;
    std::uint64_t used_fe_ = 0;
};

/// Sum of max(0, g_i) over constraints, with g_i <= kFeasibilityTolerance
/// contributing nothing.
double aggregate_violation(std::span<const double> constraint_values) noexcept;

/// Evaluates `v` against `p`, charging one FE to `budget`.
Evaluation evaluate(const Problem& p, std::span<const double> v, EvaluationBudget& budget);

// Constrained engineering design problems.
Problem make_cbd();   // cantilever beam
Problem make_cbhd();  // corrugated bulkhead
Problem make_gtd();   // gear train
Problem make_tbtd();  // three-bar truss
Problem make_tcd();   // tubular column
Problem make_wbd();   // welded beam

/// Unconstrained textbook functions: sphere, rosenbrock, rastrigin, ackley,
/// griewank. Throws ConfigError for an unknown name or zero dimension.
Problem make_classical(const std::string& name, std::size_t dimension);

/// Registry lookup: "cbd", "cbhd", "gtd", "tbtd", "tcd", "wbd", or
/// "<classical>:<D>" such as "sphere:30". Throws ConfigError listing valid
/// names on failure.
Problem make_problem(const std::string& spec);

std::vector<std::string> engineering_problem_names();
std::vector<std::string> classical_function_names();

/// Human-readable list of accepted registry names.
std::string problem_name_help();

}  // namespace cde
