#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace cde::stats {

struct SampleSet {
    std::string algorithm;
    std::vector<double> values;
};

/// Samples of every algorithm on one problem.
struct ProblemSamples {
    std::string problem;
    std::vector<SampleSet> samples;

    const SampleSet* find(const std::string& algorithm) const;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // n - 1 denominator; 0 for a single value
};

/// Throws MissingDataError for an empty sample.
MeanStd mean_std(std::span<const double> values);

/// Pooled ranks of a ++ b with tied values sharing their average rank.
std::vector<double> midranks(std::span<const double> a, std::span<const double> b);

/// Two-sided rank-sum p-value by enumerating every assignment of the pooled
/// midranks to the first sample. Practical for a.size() + b.size() <= ~30.
double rank_sum_exact(std::span<const double> a, std::span<const double> b);

/// Two-sided rank-sum p-value from the normal approximation with tie and
/// continuity corrections.
double rank_sum_normal(std::span<const double> a, std::span<const double> b);

/// Exact when both samples have at most 8 values, normal approximation
/// otherwise. Returns 1 when every pooled value is tied.
double rank_sum_test(std::span<const double> a, std::span<const double> b);

/// Holm step-down: reject sorted hypothesis k while p_(k) <= alpha / (m - k + 1).
/// Result is in input order.
std::vector<bool> holm_adjust(std::span<const double> p_values, double alpha);

/// Holm-adjusted p-values, input order; p_adj <= alpha iff holm_adjust rejects.
std::vector<double> holm_adjusted_p(std::span<const double> p_values);

enum class Verdict { plus, approx, minus };

/// "+", "~", "-".
std::string symbol(Verdict v);

struct VerdictEntry {
    std::string problem;
    std::string competitor;
    Verdict verdict = Verdict::approx;
    double p_raw = 1.0;
    double p_adjusted = 1.0;
    double reference_mean = 0.0;
    double competitor_mean = 0.0;
};

struct VerdictCounts {
    int plus = 0;
    int approx = 0;
    int minus = 0;
};

struct VerdictMatrix {
    std::string reference;
    std::vector<std::string> competitors;
    std::vector<VerdictEntry> entries;

    const VerdictEntry& at(const std::string& problem, const std::string& competitor) const;
    VerdictCounts counts(const std::string& competitor) const;
};

/// Per problem, rank-sum p-values of reference vs each competitor are Holm
/// adjusted together; a rejection goes to whichever side has the smaller mean.
VerdictMatrix verdicts(const std::string& reference, std::span<const ProblemSamples> problems,
                       double alpha = 0.05);

struct RankTable {
    std::vector<std::string> algorithms;
    std::vector<double> average_rank;                   // parallel to algorithms
    std::vector<std::map<std::string, double>> per_problem;  // rank of each algorithm per problem

    double rank_of(const std::string& algorithm) const;
};

/// Ranks algorithms by mean (1 = smallest, ties averaged) on each problem and
/// averages over problems. `means[k]` maps algorithm name to its mean on
/// problem k.
RankTable average_ranks(const std::vector<std::string>& algorithms,
                        std::span<const std::map<std::string, double>> means);

}  // namespace cde::stats
