#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cde/core.hpp"
#include "cde/problems.hpp"
#include "cde/rng.hpp"

namespace cde {

enum class MutationKind { rand_1, cur_1, best_1, winner_to_best_1 };

std::string to_string(MutationKind kind);
MutationKind parse_mutation_kind(const std::string& text);

struct FixedValue {
    double value;
};

struct NormalSampled {
    double mu;
    double sigma;
};

using ParamMode = std::variant<FixedValue, NormalSampled>;

/// How F (or F1/F2) and Cr are chosen. Sampled F is truncated to (0, 1] by
/// rejection; sampled Cr is clamped to [0, 1]. Draws happen per individual per
/// generation; with per_dimension_scaling each component gets its own F.
struct ControlParams {
    ParamMode scale = FixedValue{0.5};
    ParamMode crossover = FixedValue{0.8};
    bool per_dimension_scaling = false;

    void validate() const;
};

/// Test hook that pins the outcome of the winner-to-best competition.
enum class CompetitionOverride { none, competitor_wins, incumbent_wins };

struct RunConfig {
    std::size_t population_size = 100;
    std::uint64_t max_fe = 10'000;
    MutationKind strategy = MutationKind::winner_to_best_1;
    ControlParams params{NormalSampled{0.5, 0.3}, NormalSampled{0.5, 0.3}};
    std::uint64_t seed = 0;
    /// FE counts at which best-so-far is recorded. Empty means once per
    /// generation. The final FE count is always recorded.
    std::vector<std::uint64_t> trace_checkpoints;
    CompetitionOverride competition = CompetitionOverride::none;

    void validate() const;
};

/// Named algorithm presets: "de" (DE/rand/1/bin, F=0.5, Cr=0.8), "de-cur1",
/// "de-best1" (same F/Cr, other classic schemes) and "cde" (winner-to-best/1,
/// F1, F2, Cr ~ N(0.5, 0.3)). Only strategy and params are set.
RunConfig algorithm_preset(const std::string& name);
std::vector<std::string> algorithm_names();

struct TracePoint {
    std::uint64_t fe = 0;
    double best_objective = 0.0;

    bool operator==(const TracePoint&) const = default;
};

struct ConvergenceTrace {
    std::vector<TracePoint> points;
};

struct RunResult {
    Individual best;
    ConvergenceTrace trace;
    std::uint64_t fe_used = 0;
    std::uint64_t generations = 0;
    std::uint64_t seed = 0;
};

/// Output of one mutation, with the indices it used.
struct Mutant {
    DecisionVector vector;
    std::size_t base = 0;                    // index of the base vector
    std::array<std::size_t, 3> donors{};     // r1, r2, r3 as drawn
    std::size_t best = 0;                    // x_best index (classic best_1 and winner-to-best)
    bool competitor_won = false;             // winner-to-best only
};

/// `count` indices uniform on [0, n), mutually distinct and not in `excluded`.
/// Each is drawn by rejection, in order.
std::vector<std::size_t> draw_distinct_indices(RngStream& rng, std::size_t n, std::size_t count,
                                               std::span<const std::size_t> excluded);

/// Uniform initialization x_ij = r (ub_j - lb_j) + lb_j, all members evaluated.
/// Throws BudgetExhausted when the budget cannot cover `size` evaluations.
Population initialize(const Problem& p, std::size_t size, EvaluationBudget& budget, RngStream& rng);

/// DE/rand/1, DE/cur/1 or DE/best/1. `scale` holds one F or one per
/// dimension. `best` defaults to the population best. Not bound-repaired.
Mutant mutate_classic(const Population& pop, std::size_t i, MutationKind kind,
                      std::span<const double> scale, RngStream& rng,
                      std::optional<std::size_t> best = std::nullopt);
Mutant mutate_classic(const Population& pop, std::size_t i, MutationKind kind, double scale,
                      RngStream& rng, std::optional<std::size_t> best = std::nullopt);

/// DE/winner-to-best/1: a random competitor r1 != i challenges x_i; the strictly
/// better of the two is the base, which moves toward x_best by F1 and takes a
/// random difference x_r2 - x_r3 scaled by F2 (r2, r3 distinct from i and r1).
/// Not bound-repaired.
Mutant mutate_winner_to_best(const Population& pop, std::size_t i, std::span<const double> f1,
                             std::span<const double> f2, RngStream& rng,
                             std::optional<std::size_t> best = std::nullopt,
                             CompetitionOverride competition = CompetitionOverride::none);
Mutant mutate_winner_to_best(const Population& pop, std::size_t i, double f1, double f2,
                             RngStream& rng, std::optional<std::size_t> best = std::nullopt,
                             CompetitionOverride competition = CompetitionOverride::none);

/// Binomial crossover; j_rand is drawn first, then one uniform per component.
DecisionVector crossover_binomial(std::span<const double> target, std::span<const double> mutant,
                                  double crossover_rate, RngStream& rng);

/// One-to-one replacement; the trial wins ties.
const Individual& select_greedy(const Individual& parent, const Individual& trial) noexcept;

/// Everything the engine decided for one slot in one generation.
struct TrialRecord {
    std::uint64_t generation = 0;
    std::size_t index = 0;
    std::vector<double> f1;  // F for classic schemes
    std::vector<double> f2;  // empty for classic schemes
    double crossover_rate = 0.0;
    Mutant mutant;
    Individual trial;
};

/// Instrumentation hooks, called synchronously from run().
class RunObserver {
public:
    virtual ~RunObserver() = default;
    virtual void on_initialized(const Population& /*pop*/, const EvaluationBudget& /*budget*/) {}
    virtual void on_trial(const TrialRecord& /*record*/) {}
    virtual void on_generation(const Population& /*before*/, const Population& /*after*/,
                               const EvaluationBudget& /*budget*/) {}
};

/// Runs DE or CDE until the next full generation would exceed cfg.max_fe.
RunResult run(const Problem& p, const RunConfig& cfg, RunObserver* observer = nullptr);

}  // namespace cde
