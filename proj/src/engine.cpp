#include "cde/engine.hpp"

#include <algorithm>
#include <limits>

namespace cde {

namespace {

constexpr std::size_t kUnused = std::numeric_limits<std::size_t>::max();

void validate_mode(const ParamMode& mode, const char* what, double lo, double hi, bool open_lo) {
    if (const auto* fixed = std::get_if<FixedValue>(&mode)) {
        const bool ok = (open_lo ? fixed->value > lo : fixed->value >= lo) && fixed->value <= hi;
        if (!ok)
            throw ConfigError(std::string("fixed ") + what + " = " + std::to_string(fixed->value) +
                              " out of range");
    } else {
        const auto& s = std::get<NormalSampled>(mode);
        if (!(s.sigma > 0.0)) throw ConfigError(std::string("sampled ") + what + " needs sigma > 0");
    }
}

double sample_scale(const ParamMode& mode, RngStream& rng) {
    if (const auto* fixed = std::get_if<FixedValue>(&mode)) return fixed->value;
    const auto& s = std::get<NormalSampled>(mode);
    return sample_truncated_normal(rng, s.mu, s.sigma, 0.0, 1.0);
}

double sample_rate(const ParamMode& mode, RngStream& rng) {
    if (const auto* fixed = std::get_if<FixedValue>(&mode)) return fixed->value;
    const auto& s = std::get<NormalSampled>(mode);
    return std::clamp(rng.normal(s.mu, s.sigma), 0.0, 1.0);
}

std::vector<double> sample_scales(const ControlParams& params, std::size_t dimension, RngStream& rng) {
    const std::size_t n = params.per_dimension_scaling ? dimension : 1;
    std::vector<double> out(n);
    for (auto& f : out) f = sample_scale(params.scale, rng);
    return out;
}

void check_population(const Population& pop, std::size_t i) {
    if (pop.size() < 4)
        throw ConfigError("mutation needs a population of at least 4, got " + std::to_string(pop.size()));
    if (i >= pop.size()) throw ConfigError("mutation target index out of range");
}

void check_scale(std::span<const double> scale, std::size_t dimension) {
    if (scale.size() != 1 && scale.size() != dimension)
        throw ConfigError("scale factor must have length 1 or D");
}

inline double at(std::span<const double> scale, std::size_t j) {
    return scale.size() == 1 ? scale[0] : scale[j];
}

}  // namespace

std::string to_string(MutationKind kind) {
    switch (kind) {
        case MutationKind::rand_1: return "rand_1";
        case MutationKind::cur_1: return "cur_1";
        case MutationKind::best_1: return "best_1";
        case MutationKind::winner_to_best_1: return "winner_to_best_1";
    }
    return "?";
}

MutationKind parse_mutation_kind(const std::string& text) {
    for (auto k : {MutationKind::rand_1, MutationKind::cur_1, MutationKind::best_1,
                   MutationKind::winner_to_best_1})
        if (to_string(k) == text) return k;
    throw ConfigError("unknown mutation strategy '" + text +
                      "' (expected rand_1, cur_1, best_1 or winner_to_best_1)");
}

void ControlParams::validate() const {
    validate_mode(scale, "F", 0.0, 2.0, true);
    validate_mode(crossover, "Cr", 0.0, 1.0, false);
}

void RunConfig::validate() const {
    if (population_size < 4)
        throw ConfigError("population size must be at least 4, got " + std::to_string(population_size));
    if (max_fe < population_size)
        throw ConfigError("FE budget " + std::to_string(max_fe) + " cannot cover initialization of " +
                          std::to_string(population_size) + " individuals");
    params.validate();
}

RunConfig algorithm_preset(const std::string& name) {
    RunConfig cfg;
    if (name == "cde") {
        cfg.strategy = MutationKind::winner_to_best_1;
        cfg.params = {NormalSampled{0.5, 0.3}, NormalSampled{0.5, 0.3}};
        return cfg;
    }
    cfg.params = {FixedValue{0.5}, FixedValue{0.8}};
    if (name == "de") {
        cfg.strategy = MutationKind::rand_1;
    } else if (name == "de-cur1") {
        cfg.strategy = MutationKind::cur_1;
    } else if (name == "de-best1") {
        cfg.strategy = MutationKind::best_1;
    } else {
        std::string msg = "unknown algorithm '" + name + "'; valid algorithms:";
        for (const auto& n : algorithm_names()) msg += " " + n;
        throw ConfigError(msg);
    }
    return cfg;
}

std::vector<std::string> algorithm_names() { return {"cde", "de", "de-cur1", "de-best1"}; }

std::vector<std::size_t> draw_distinct_indices(RngStream& rng, std::size_t n, std::size_t count,
                                               std::span<const std::size_t> excluded) {
    std::vector<std::size_t> taken(excluded.begin(), excluded.end());
    std::sort(taken.begin(), taken.end());
    taken.erase(std::unique(taken.begin(), taken.end()), taken.end());
    const std::size_t blocked = static_cast<std::size_t>(
        std::count_if(taken.begin(), taken.end(), [n](std::size_t k) { return k < n; }));
    if (n < blocked + count) throw ConfigError("not enough population members for distinct indices");

    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
        const std::size_t r = rng.uniform_index(n);
        const bool clash = std::find(excluded.begin(), excluded.end(), r) != excluded.end() ||
                           std::find(out.begin(), out.end(), r) != out.end();
        if (!clash) out.push_back(r);
    }
    return out;
}

Population initialize(const Problem& p, std::size_t size, EvaluationBudget& budget, RngStream& rng) {
    if (budget.remaining() < size)
        throw BudgetExhausted("budget of " + std::to_string(budget.remaining()) +
                              " FE cannot initialize " + std::to_string(size) + " individuals");
    const Bounds& b = p.bounds();
    Population pop;
    pop.members.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        Individual ind;
        ind.vector.resize(p.dimension());
        for (std::size_t j = 0; j < p.dimension(); ++j)
            ind.vector[j] = rng.uniform() * b.width(j) + b.lower(j);
        ind.eval = evaluate(p, ind.vector, budget);
        pop.members.push_back(std::move(ind));
    }
    pop.generation = 0;
    return pop;
}

Mutant mutate_classic(const Population& pop, std::size_t i, MutationKind kind,
                      std::span<const double> scale, RngStream& rng, std::optional<std::size_t> best) {
    check_population(pop, i);
    if (kind == MutationKind::winner_to_best_1)
        throw ConfigError("mutate_classic does not handle winner_to_best_1");
    const std::size_t dim = pop[i].vector.size();
    check_scale(scale, dim);

    const std::size_t excluded[] = {i};
    const std::size_t needed = kind == MutationKind::rand_1 ? 3 : 2;
    const auto r = draw_distinct_indices(rng, pop.size(), needed, excluded);

    Mutant m;
    m.donors = {r[0], r[1], needed == 3 ? r[2] : kUnused};
    m.best = best.value_or(pop.best_index());

    std::size_t base = 0;
    std::size_t plus = 0;
    std::size_t minus = 0;
    switch (kind) {
        case MutationKind::rand_1: base = r[0], plus = r[1], minus = r[2]; break;
        case MutationKind::cur_1: base = i, plus = r[0], minus = r[1]; break;
        case MutationKind::best_1: base = m.best, plus = r[0], minus = r[1]; break;
        default: break;
    }
    m.base = base;
    const auto& xb = pop[base].vector;
    const auto& xp = pop[plus].vector;
    const auto& xm = pop[minus].vector;
    m.vector.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) m.vector[j] = xb[j] + at(scale, j) * (xp[j] - xm[j]);
    return m;
}

Mutant mutate_classic(const Population& pop, std::size_t i, MutationKind kind, double scale,
                      RngStream& rng, std::optional<std::size_t> best) {
    const double s[] = {scale};
    return mutate_classic(pop, i, kind, s, rng, best);
}

Mutant mutate_winner_to_best(const Population& pop, std::size_t i, std::span<const double> f1,
                             std::span<const double> f2, RngStream& rng,
                             std::optional<std::size_t> best, CompetitionOverride competition) {
    check_population(pop, i);
    const std::size_t dim = pop[i].vector.size();
    check_scale(f1, dim);
    check_scale(f2, dim);

    const std::size_t not_self[] = {i};
    const std::size_t r1 = draw_distinct_indices(rng, pop.size(), 1, not_self)[0];

    Mutant m;
    switch (competition) {
        case CompetitionOverride::none:
            m.competitor_won = better(pop[r1].eval, pop[i].eval);
            break;
        case CompetitionOverride::competitor_wins: m.competitor_won = true; break;
        case CompetitionOverride::incumbent_wins: m.competitor_won = false; break;
    }
    m.base = m.competitor_won ? r1 : i;
    m.best = best.value_or(pop.best_index());

    const std::size_t taken[] = {i, r1};
    const auto r = draw_distinct_indices(rng, pop.size(), 2, taken);
    m.donors = {r1, r[0], r[1]};

    const auto& xb = pop[m.base].vector;
    const auto& xbest = pop[m.best].vector;
    const auto& x2 = pop[r[0]].vector;
    const auto& x3 = pop[r[1]].vector;
    m.vector.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
        m.vector[j] = xb[j] + at(f1, j) * (xbest[j] - xb[j]) + at(f2, j) * (x2[j] - x3[j]);
    return m;
}

Mutant mutate_winner_to_best(const Population& pop, std::size_t i, double f1, double f2,
                             RngStream& rng, std::optional<std::size_t> best,
                             CompetitionOverride competition) {
    const double a[] = {f1};
    const double b[] = {f2};
    return mutate_winner_to_best(pop, i, a, b, rng, best, competition);
}

DecisionVector crossover_binomial(std::span<const double> target, std::span<const double> mutant,
                                  double crossover_rate, RngStream& rng) {
    if (target.size() != mutant.size())
        throw ConfigError("crossover: target and mutant dimensions differ");
    if (target.empty()) throw ConfigError("crossover: empty vectors");
    const std::size_t forced = rng.uniform_index(target.size());
    DecisionVector trial(target.begin(), target.end());
    for (std::size_t j = 0; j < trial.size(); ++j) {
        const double r = rng.uniform();
        if (r <= crossover_rate || j == forced) trial[j] = mutant[j];
    }
    return trial;
}

const Individual& select_greedy(const Individual& parent, const Individual& trial) noexcept {
    return compare_fitness(trial.eval, parent.eval) == Ordering::b_better ? parent : trial;
}

namespace {

class TraceRecorder {
public:
    explicit TraceRecorder(std::vector<std::uint64_t> checkpoints) : checkpoints_(std::move(checkpoints)) {
        std::sort(checkpoints_.begin(), checkpoints_.end());
    }

    void observe(std::uint64_t fe, double best) {
        if (checkpoints_.empty()) {
            push(fe, best);
            return;
        }
        bool crossed = false;
        while (next_ < checkpoints_.size() && fe >= checkpoints_[next_]) {
            crossed = true;
            ++next_;
        }
        if (crossed) push(fe, best);
    }

    ConvergenceTrace finish(std::uint64_t fe, double best) {
        push(fe, best);
        return std::move(trace_);
    }

private:
    void push(std::uint64_t fe, double best) {
        if (!trace_.points.empty() && trace_.points.back().fe == fe) return;
        trace_.points.push_back({fe, best});
    }

    std::vector<std::uint64_t> checkpoints_;
    std::size_t next_ = 0;
    ConvergenceTrace trace_;
};

}  // namespace

RunResult run(const Problem& p, const RunConfig& cfg, RunObserver* observer) {
    cfg.validate();
    RngStream rng(cfg.seed);
    EvaluationBudget budget(cfg.max_fe);
    TraceRecorder trace(cfg.trace_checkpoints);
    const std::size_t n = cfg.population_size;
    const std::size_t dim = p.dimension();
    const bool competitive = cfg.strategy == MutationKind::winner_to_best_1;

    Population pop = initialize(p, n, budget, rng);
    if (observer) observer->on_initialized(pop, budget);
    std::size_t best = pop.best_index();
    trace.observe(budget.used_fe(), pop[best].eval.objective);

    try {
        while (budget.remaining() >= n) {
            Population next = pop;
            for (std::size_t i = 0; i < n; ++i) {
                TrialRecord rec;
                rec.generation = pop.generation;
                rec.index = i;
                rec.f1 = sample_scales(cfg.params, dim, rng);
                if (competitive) rec.f2 = sample_scales(cfg.params, dim, rng);
                rec.crossover_rate = sample_rate(cfg.params.crossover, rng);

                rec.mutant = competitive
                                 ? mutate_winner_to_best(pop, i, rec.f1, rec.f2, rng, best, cfg.competition)
                                 : mutate_classic(pop, i, cfg.strategy, rec.f1, rng, best);
                const DecisionVector repaired = repair_to_bounds(rec.mutant.vector, p.bounds());
                rec.trial.vector = crossover_binomial(pop[i].vector, repaired, rec.crossover_rate, rng);
                rec.trial.eval = evaluate(p, rec.trial.vector, budget);

                next[i] = select_greedy(pop[i], rec.trial);
                if (observer) observer->on_trial(rec);
            }
            next.generation = pop.generation + 1;
            if (observer) observer->on_generation(pop, next, budget);
            pop = std::move(next);
            best = pop.best_index();
            trace.observe(budget.used_fe(), pop[best].eval.objective);
        }
    } catch (const BudgetExhausted&) {
        // unreachable with generation-granular stopping
    }

    RunResult result;
    result.best = pop[best];
    result.fe_used = budget.used_fe();
    result.generations = pop.generation;
    result.seed = cfg.seed;
    result.trace = trace.finish(budget.used_fe(), result.best.eval.objective);
    return result;
}

}  // namespace cde
