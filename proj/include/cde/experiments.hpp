#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cde/engine.hpp"
#include "cde/stats.hpp"

namespace cde {

struct FixedBudget {
    std::uint64_t fe;
};

struct PerDimensionBudget {
    std::uint64_t multiplier;
};

using BudgetRule = std::variant<FixedBudget, PerDimensionBudget>;

std::uint64_t budget_for(const BudgetRule& rule, std::size_t dimension);

struct AlgorithmSpec {
    std::string name;
    RunConfig config;  // seed, max_fe and trace_checkpoints are filled per cell
};

struct ExperimentPlan {
    std::vector<std::string> problems;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t trials = 30;
    std::uint64_t base_seed = 0;
    BudgetRule budget = FixedBudget{10'000};

    /// Resolves every problem and algorithm name; throws ConfigError on the
    /// first failure.
    void validate() const;

    std::uint64_t seed_for(std::size_t trial) const { return base_seed + trial; }
    const AlgorithmSpec& algorithm(const std::string& name) const;
};

/// Parses the JSON plan format:
///   { "problems": ["cbd", "sphere:30"],
///     "algorithms": ["de", {"name": "cde-pd", "preset": "cde", "per_dimension_scaling": true}],
///     "trials": 30, "base_seed": 1,
///     "budget": {"fixed": 10000} | {"per_dimension": 500},
///     "population_size": 100 }
/// Errors name the offending key.
ExperimentPlan parse_plan(const std::string& text);
ExperimentPlan load_plan(const std::filesystem::path& path);
std::string dump_plan(const ExperimentPlan& plan);

struct TrialResult {
    std::string problem;
    std::string algorithm;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t fe_used = 0;
    double best_objective = 0.0;
    double best_violation = 0.0;
    DecisionVector best_vector;  // effective point (integer dimensions rounded)
    ConvergenceTrace trace;      // empty when loaded from a results file

    bool feasible() const noexcept { return best_violation == 0.0; }
};

/// Runs one (problem, algorithm, trial) cell.
TrialResult run_cell(const ExperimentPlan& plan, const std::string& problem,
                     const std::string& algorithm, std::size_t trial);

struct ExecuteOptions {
    std::optional<std::filesystem::path> out_dir;  // persist results and traces here
    std::size_t jobs = 1;
    std::function<void(const TrialResult&)> on_cell_done;  // called under the store lock
};

/// Runs every cell of the plan, reusing cells already present in
/// out_dir/results.csv. Returns results in plan order (problem, algorithm,
/// trial); the results file is rewritten in that order at the end.
std::vector<TrialResult> execute(const ExperimentPlan& plan, const ExecuteOptions& options = {});

// Raw results: problem,algorithm,trial,seed,fe_used,best_objective,best_violation,best_vector
inline constexpr const char* kResultsHeader =
    "problem,algorithm,trial,seed,fe_used,best_objective,best_violation,best_vector";

std::string format_double(double v);
std::string format_result_row(const TrialResult& r);
std::string format_results_csv(const std::vector<TrialResult>& results);

/// Reads a results file. A truncated final line (interrupted append) is
/// ignored; any other malformed line throws.
std::vector<TrialResult> load_results(const std::filesystem::path& path);

std::string format_trace_csv(const ConvergenceTrace& trace);
ConvergenceTrace load_trace(const std::filesystem::path& path);
std::filesystem::path trace_path(const std::filesystem::path& out_dir, const std::string& problem,
                                 const std::string& algorithm, std::size_t trial);

struct AlgorithmSummary {
    std::string algorithm;
    std::size_t trials = 0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t infeasible = 0;
};

/// Per-algorithm mean and sample std of best_objective on one problem, in
/// order of first appearance. Throws MissingDataError when an algorithm in
/// `algorithms` has no results or trial counts differ.
std::vector<AlgorithmSummary> summarize(const std::vector<TrialResult>& results,
                                        const std::string& problem,
                                        const std::vector<std::string>& algorithms = {});

/// Mean best-so-far across trials per algorithm at each FE of the union of
/// trace checkpoints: columns fe,<alg1>,<alg2>,...
std::string format_convergence_csv(const std::vector<TrialResult>& results, const std::string& problem,
                                   const std::vector<std::string>& algorithms);

/// Groups per-trial best objectives into the stats module's input shape.
std::vector<stats::ProblemSamples> collect_samples(const std::vector<TrialResult>& results,
                                                   const std::vector<std::string>& problems,
                                                   const std::vector<std::string>& algorithms);

}  // namespace cde
