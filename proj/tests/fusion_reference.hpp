// Textbook DE/rand-to-best/1 and DE/cur-to-best/1, written independently of
// the engine, for the operator-level fusion check.
#pragma once

#include <string>
#include <vector>

#include "cde/engine.hpp"

namespace cde::testing {

struct ReferenceDraw {
    std::size_t r1, r2, r3;
};

// r1 != i, then r2 and r3 distinct from i, r1 and each other; plain rejection.
inline ReferenceDraw reference_indices(RngStream& rng, std::size_t n, std::size_t i) {
    ReferenceDraw d{};
    do d.r1 = rng.uniform_index(n); while (d.r1 == i);
    do d.r2 = rng.uniform_index(n); while (d.r2 == i || d.r2 == d.r1);
    do d.r3 = rng.uniform_index(n); while (d.r3 == i || d.r3 == d.r1 || d.r3 == d.r2);
    return d;
}

// v = x_r1 + F1 (x_best - x_r1) + F2 (x_r2 - x_r3)
inline DecisionVector rand_to_best_1(const Population& pop, std::size_t i, std::size_t best, double f1,
                                     double f2, RngStream& rng) {
    const auto d = reference_indices(rng, pop.size(), i);
    DecisionVector v(pop[i].vector.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = pop[d.r1].vector[j] + f1 * (pop[best].vector[j] - pop[d.r1].vector[j]) +
               f2 * (pop[d.r2].vector[j] - pop[d.r3].vector[j]);
    return v;
}

// v = x_i + F1 (x_best - x_i) + F2 (x_r2 - x_r3)
inline DecisionVector cur_to_best_1(const Population& pop, std::size_t i, std::size_t best, double f1,
                                    double f2, RngStream& rng) {
    const auto d = reference_indices(rng, pop.size(), i);
    DecisionVector v(pop[i].vector.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = pop[i].vector[j] + f1 * (pop[best].vector[j] - pop[i].vector[j]) +
               f2 * (pop[d.r2].vector[j] - pop[d.r3].vector[j]);
    return v;
}

inline Population random_population(RngStream& gen, std::size_t n, std::size_t dim) {
    Population pop;
    for (std::size_t k = 0; k < n; ++k) {
        Individual ind;
        for (std::size_t j = 0; j < dim; ++j) ind.vector.push_back(gen.normal(0.0, 10.0));
        ind.eval.objective = gen.normal(0.0, 5.0);
        ind.eval.violation = gen.uniform() < 0.3 ? gen.uniform() : 0.0;
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

struct FusionReport {
    std::size_t cases = 0;
    std::size_t mismatches_branch_a = 0;
    std::size_t mismatches_branch_b = 0;
};

inline FusionReport check_fusion(std::size_t cases, std::uint64_t seed) {
    FusionReport report;
    RngStream gen(seed);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t n = 4 + gen.uniform_index(30);
        const std::size_t dim = 1 + gen.uniform_index(12);
        const Population pop = random_population(gen, n, dim);
        const std::size_t i = gen.uniform_index(n);
        const std::size_t best = pop.best_index();
        const double f1 = gen.uniform();
        const double f2 = gen.uniform();
        const std::uint64_t s = gen.next_u64();

        RngStream a1(s), a2(s), b1(s), b2(s);
        const auto forced_a =
            mutate_winner_to_best(pop, i, f1, f2, a1, best, CompetitionOverride::competitor_wins);
        const auto forced_b =
            mutate_winner_to_best(pop, i, f1, f2, b1, best, CompetitionOverride::incumbent_wins);
        if (forced_a.vector != rand_to_best_1(pop, i, best, f1, f2, a2) || a1.next_u64() != a2.next_u64())
            ++report.mismatches_branch_a;
        if (forced_b.vector != cur_to_best_1(pop, i, best, f1, f2, b2) || b1.next_u64() != b2.next_u64())
            ++report.mismatches_branch_b;
        ++report.cases;
    }
    return report;
}

}  // namespace cde::testing
