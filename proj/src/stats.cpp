#include "cde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cde/core.hpp"

namespace cde::stats {

const SampleSet* ProblemSamples::find(const std::string& algorithm) const {
    for (const auto& s : samples)
        if (s.algorithm == algorithm) return &s;
    return nullptr;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) throw MissingDataError("mean_std: empty sample");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

std::vector<double> midranks(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return pooled[l] < pooled[r]; });
    std::vector<double> ranks(pooled.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k + 1;
        while (end < order.size() && pooled[order[end]] == pooled[order[k]]) ++end;
        // positions k..end-1 hold ranks k+1..end
        const double rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t t = k; t < end; ++t) ranks[order[t]] = rank;
        k = end;
    }
    return ranks;
}

namespace {

void require_nonempty(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw MissingDataError("rank-sum test needs two non-empty samples");
}

}  // namespace

double rank_sum_exact(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    const auto ranks = midranks(a, b);
    const std::size_t n = a.size();
    const std::size_t total = ranks.size();

    // Midranks are multiples of 1/2, so doubled ranks are exact integers.
    std::vector<long> doubled(total);
    for (std::size_t k = 0; k < total; ++k) doubled[k] = std::lround(2.0 * ranks[k]);
    const long max_sum = std::accumulate(doubled.begin(), doubled.end(), 0L);

    // ways[c][s]: subsets of size c with doubled rank sum s.
    std::vector<std::vector<double>> ways(n + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t k = 0; k < total; ++k) {
        const long r = doubled[k];
        for (std::size_t c = std::min(n, k + 1); c >= 1; --c)
            for (long s = max_sum; s >= r; --s) ways[c][s] += ways[c - 1][s - r];
    }

    long observed = 0;
    for (std::size_t k = 0; k < n; ++k) observed += doubled[k];
    // Expected doubled sum n (N + 1) is an integer.
    const long expected = static_cast<long>(n * (total + 1));
    const long deviation = std::labs(observed - expected);

    double hits = 0.0;
    double all = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
        all += ways[n][s];
        if (std::labs(s - expected) >= deviation) hits += ways[n][s];
    }
    return std::min(1.0, hits / all);
}

double rank_sum_normal(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    const auto ranks = midranks(a, b);
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    const double total = n + m;

    double w = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) w += ranks[k];
    const double expected = n * (total + 1.0) / 2.0;

    std::vector<double> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t k = 0; k < sorted.size();) {
        std::size_t end = k;
        while (end < sorted.size() && sorted[end] == sorted[k]) ++end;
        const double t = static_cast<double>(end - k);
        tie_term += t * t * t - t;
        k = end;
    }
    const double variance =
        n * m / 12.0 * ((total + 1.0) - (total > 1.0 ? tie_term / (total * (total - 1.0)) : 0.0));
    if (!(variance > 0.0)) return 1.0;

    const double z = std::max(std::abs(w - expected) - 0.5, 0.0) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double rank_sum_test(std::span<const double> a, std::span<const double> b) {
    require_nonempty(a, b);
    if (a.size() <= 8 && b.size() <= 8) return rank_sum_exact(a, b);
    return rank_sum_normal(a, b);
}

namespace {

std::vector<std::size_t> ascending_order(std::span<const double> p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return p[l] < p[r]; });
    return order;
}

}  // namespace

std::vector<bool> holm_adjust(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    std::vector<bool> reject(m, false);
    const auto order = ascending_order(p_values);
    for (std::size_t k = 0; k < m; ++k) {
        const double threshold = alpha / static_cast<double>(m - k);
        if (!(p_values[order[k]] <= threshold)) break;
        reject[order[k]] = true;
    }
    return reject;
}

std::vector<double> holm_adjusted_p(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    std::vector<double> adjusted(m, 1.0);
    const auto order = ascending_order(p_values);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double scaled = std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]);
        running = std::max(running, scaled);
        adjusted[order[k]] = running;
    }
    return adjusted;
}

std::string symbol(Verdict v) {
    switch (v) {
        case Verdict::plus: return "+";
        case Verdict::approx: return "~";
        case Verdict::minus: return "-";
    }
    return "?";
}

const VerdictEntry& VerdictMatrix::at(const std::string& problem, const std::string& competitor) const {
    for (const auto& e : entries)
        if (e.problem == problem && e.competitor == competitor) return e;
    throw MissingDataError("no verdict for " + competitor + " on " + problem);
}

VerdictCounts VerdictMatrix::counts(const std::string& competitor) const {
    VerdictCounts c;
    for (const auto& e : entries) {
        if (e.competitor != competitor) continue;
        switch (e.verdict) {
            case Verdict::plus: ++c.plus; break;
            case Verdict::approx: ++c.approx; break;
            case Verdict::minus: ++c.minus; break;
        }
    }
    return c;
}

VerdictMatrix verdicts(const std::string& reference, std::span<const ProblemSamples> problems,
                       double alpha) {
    VerdictMatrix out;
    out.reference = reference;
    for (const auto& ps : problems) {
        for (const auto& s : ps.samples)
            if (s.algorithm != reference &&
                std::find(out.competitors.begin(), out.competitors.end(), s.algorithm) == out.competitors.end())
                out.competitors.push_back(s.algorithm);
    }

    for (const auto& ps : problems) {
        const SampleSet* ref = ps.find(reference);
        if (ref == nullptr || ref->values.empty())
            throw MissingDataError("missing cell: " + reference + " on " + ps.problem);
        const double ref_mean = mean_std(ref->values).mean;

        std::vector<VerdictEntry> row;
        std::vector<double> p_raw;
        for (const auto& competitor : out.competitors) {
            const SampleSet* other = ps.find(competitor);
            if (other == nullptr || other->values.empty())
                throw MissingDataError("missing cell: " + competitor + " on " + ps.problem);
            VerdictEntry e;
            e.problem = ps.problem;
            e.competitor = competitor;
            e.reference_mean = ref_mean;
            e.competitor_mean = mean_std(other->values).mean;
            e.p_raw = rank_sum_test(ref->values, other->values);
            p_raw.push_back(e.p_raw);
            row.push_back(std::move(e));
        }
        const auto reject = holm_adjust(p_raw, alpha);
        const auto adjusted = holm_adjusted_p(p_raw);
        for (std::size_t k = 0; k < row.size(); ++k) {
            row[k].p_adjusted = adjusted[k];
            if (reject[k] && row[k].reference_mean < row[k].competitor_mean)
                row[k].verdict = Verdict::plus;
            else if (reject[k] && row[k].reference_mean > row[k].competitor_mean)
                row[k].verdict = Verdict::minus;
            else
                row[k].verdict = Verdict::approx;
            out.entries.push_back(std::move(row[k]));
        }
    }
    return out;
}

double RankTable::rank_of(const std::string& algorithm) const {
    for (std::size_t k = 0; k < algorithms.size(); ++k)
        if (algorithms[k] == algorithm) return average_rank[k];
    throw MissingDataError("no rank for algorithm " + algorithm);
}

RankTable average_ranks(const std::vector<std::string>& algorithms,
                        std::span<const std::map<std::string, double>> means) {
    RankTable table;
    table.algorithms = algorithms;
    table.average_rank.assign(algorithms.size(), 0.0);
    if (means.empty()) throw MissingDataError("average_ranks: no problems");

    for (std::size_t p = 0; p < means.size(); ++p) {
        std::vector<double> values;
        for (const auto& alg : algorithms) {
            const auto it = means[p].find(alg);
            if (it == means[p].end())
                throw MissingDataError("missing mean for " + alg + " on problem #" + std::to_string(p));
            values.push_back(it->second);
        }
        const auto ranks = midranks(values, {});
        std::map<std::string, double> row;
        for (std::size_t k = 0; k < algorithms.size(); ++k) {
            row[algorithms[k]] = ranks[k];
            table.average_rank[k] += ranks[k];
        }
        table.per_problem.push_back(std::move(row));
    }
    for (auto& r : table.average_rank) r /= static_cast<double>(means.size());
    return table;
}

}  // namespace cde::stats
