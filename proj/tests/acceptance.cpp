// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "cde/experiments.hpp"
#include "cde/stats.hpp"
#include "engine_properties.hpp"
#include "fusion_reference.hpp"
#include "stats_oracles.hpp"

using namespace cde;

namespace {

// Tolerances, fixed.
constexpr std::size_t kTrials = 30;
constexpr std::uint64_t kBaseSeed = 1;
constexpr std::uint64_t kEngineeringFe = 10'000;
constexpr double kCbdTarget = 1.3400, kCbdMeanTol = 1e-3, kCbdStdMax = 1e-3;
constexpr double kCbhdTarget = 6.843, kCbhdTol = 0.01;
constexpr double kTbtdTarget = 263.90, kTbtdTol = 0.01;
constexpr double kGtdMedianMax = 1e-9, kGtdBestMax = 1e-11, kGtdOracle = 2.7009e-12, kGtdOracleRel = 1e-4;
constexpr double kWbdMeanMax = 1.75;
constexpr double kTcdRel = 0.005;
constexpr std::uint64_t kSphereFe = 15'000;
constexpr double kAlpha = 0.05;
constexpr std::size_t kPropertyCases = 1000;
constexpr std::size_t kFusionCases = 5000;
constexpr double kApproxGap = 0.02;

int failures = 0;

void report(int id, bool pass, const std::string& what) {
    std::printf("[%s] C%d %s\n", pass ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<TrialResult> cde_trials(const std::vector<std::string>& problems, std::uint64_t fe,
                                    const std::vector<std::string>& algorithms = {"cde"}) {
    ExperimentPlan plan;
    plan.problems = problems;
    for (const auto& a : algorithms) plan.algorithms.push_back({a, algorithm_preset(a)});
    plan.trials = kTrials;
    plan.base_seed = kBaseSeed;
    plan.budget = FixedBudget{fe};
    ExecuteOptions opts;
    opts.jobs = jobs();
    return execute(plan, opts);
}

std::vector<double> objectives(const std::vector<TrialResult>& results, const std::string& problem,
                               const std::string& algorithm = "cde") {
    std::vector<double> v;
    for (const auto& r : results)
        if (r.problem == problem && r.algorithm == algorithm) v.push_back(r.best_objective);
    return v;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double gtd_exhaustive() {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 12; a <= 60; ++a)
        for (int b = 12; b <= 60; ++b)
            for (int c = 12; c <= 60; ++c)
                for (int d = 12; d <= 60; ++d) {
                    const double r = 1.0 / 6.931 - static_cast<double>(c * b) / static_cast<double>(a * d);
                    best = std::min(best, r * r);
                }
    return best;
}

}  // namespace

int main() {
    const auto eng = cde_trials(engineering_problem_names(), kEngineeringFe);

    {
        const auto ms = stats::mean_std(objectives(eng, "cbd"));
        report(1, std::abs(ms.mean - kCbdTarget) <= kCbdMeanTol && ms.std <= kCbdStdMax,
               fmt("cbd: mean=%.6f (target %.4f +/- %g), std=%.3e (max %g)", ms.mean, kCbdTarget, kCbdMeanTol,
                   ms.std, kCbdStdMax));
    }
    {
        const double m = stats::mean_std(objectives(eng, "cbhd")).mean;
        report(2, std::abs(m - kCbhdTarget) <= kCbhdTol,
               fmt("cbhd: mean=%.6f (target %.3f +/- %g)", m, kCbhdTarget, kCbhdTol));
    }
    {
        const double m = stats::mean_std(objectives(eng, "tbtd")).mean;
        report(3, std::abs(m - kTbtdTarget) <= kTbtdTol,
               fmt("tbtd: mean=%.6f (target %.2f +/- %g)", m, kTbtdTarget, kTbtdTol));
    }
    {
        const auto v = objectives(eng, "gtd");
        const double med = median(v);
        const double best = *std::min_element(v.begin(), v.end());
        const double oracle = gtd_exhaustive();
        const bool oracle_ok = std::abs(oracle - kGtdOracle) <= kGtdOracleRel * kGtdOracle &&
                               std::abs(*make_gtd().known_best() - oracle) <= kGtdOracleRel * oracle;
        report(4, med <= kGtdMedianMax && best <= kGtdBestMax && oracle_ok,
               fmt("gtd: median=%.3e (max %g), best=%.3e (max %g), exhaustive optimum=%.6e (registry %.6e)", med,
                   kGtdMedianMax, best, kGtdBestMax, oracle, *make_gtd().known_best()));
    }
    {
        const double m = stats::mean_std(objectives(eng, "wbd")).mean;
        std::size_t infeasible = 0;
        for (const auto& r : eng)
            if (r.problem == "wbd" && !r.feasible()) ++infeasible;
        report(5, m <= kWbdMeanMax && infeasible == 0,
               fmt("wbd: mean=%.6f (max %.2f), infeasible=%zu/%zu", m, kWbdMeanMax, infeasible, kTrials));
    }
    {
        const double oracle = *make_tcd().known_best();
        const auto v = objectives(eng, "tcd");
        const double m = stats::mean_std(v).mean;
        const double worst = *std::max_element(v.begin(), v.end());
        const double gap = std::abs(m - oracle) / oracle;
        report(6, gap <= kTcdRel && std::abs(worst - oracle) / oracle <= kTcdRel,
               fmt("tcd: mean=%.6f, worst=%.6f, oracle=%.6f, relative gap=%.2e (max %g)", m, worst, oracle, gap,
                   kTcdRel));
    }
    {
        const auto res = cde_trials({"sphere:30"}, kSphereFe, {"de", "cde"});
        const auto c = objectives(res, "sphere:30", "cde");
        const auto d = objectives(res, "sphere:30", "de");
        const double mc = stats::mean_std(c).mean;
        const double md = stats::mean_std(d).mean;
        const double p = stats::rank_sum_test(c, d);
        report(7, mc < md && p <= kAlpha,
               fmt("sphere:30 @ %llu FE: cde mean=%.3e, de mean=%.3e, rank-sum p=%.3e (alpha %.2f)",
                   static_cast<unsigned long long>(kSphereFe), mc, md, p, kAlpha));
    }
    {
        const auto r = testing::check_engine_properties(kPropertyCases, 20240601);
        for (std::size_t k = 0; k < std::min<std::size_t>(r.failures.size(), 10); ++k)
            std::printf("    %s\n", r.failures[k].c_str());
        report(8, r.cases >= kPropertyCases && r.failures.empty(),
               fmt("engine properties: %zu cases, %zu trials checked, %zu failures", r.cases, r.trials_checked,
                   r.failures.size()));
    }
    {
        const auto r = testing::check_fusion(kFusionCases, 424242);
        report(9, r.mismatches_branch_a == 0 && r.mismatches_branch_b == 0,
               fmt("operator fusion: %zu cases, rand-to-best mismatches=%zu, cur-to-best mismatches=%zu", r.cases,
                   r.mismatches_branch_a, r.mismatches_branch_b));
    }
    {
        const auto sweep = testing::sweep_exact_vs_normal(2, 8);
        std::string gaps;
        for (const auto& [n, g] : sweep.max_gap) gaps += fmt(" n=%zu:%.4f", n, g);
        bool fixtures_ok = true;
        std::string failed;
        for (const auto& f : testing::holm_fixtures())
            if (!f.pass) fixtures_ok = false, failed += " [" + f.name + "]";
        for (const auto& f : testing::rank_fixtures())
            if (!f.pass) fixtures_ok = false, failed += " [" + f.name + "]";
        std::size_t exact_mismatch = 0;
        RngStream rng(5);
        for (int k = 0; k < 500; ++k) {
            std::vector<double> a(2 + rng.uniform_index(7)), b(2 + rng.uniform_index(7));
            for (auto& x : a) x = rng.uniform();
            for (auto& x : b) x = rng.uniform() + 0.2;
            if (std::abs(stats::rank_sum_exact(a, b) - testing::brute_force_rank_sum_p(a, b)) > 1e-12)
                ++exact_mismatch;
        }
        const bool pass = sweep.worst <= kApproxGap && fixtures_ok && exact_mismatch == 0;
        report(10, pass,
               fmt("stats oracles: exact-vs-normal max gap (%zu tie-free cases, max %.2f):%s; "
                   "exact-vs-enumeration mismatches=%zu; holm/rank fixtures %s%s",
                   sweep.cases, kApproxGap, gaps.c_str(), exact_mismatch, fixtures_ok ? "ok" : "FAILED",
                   failed.c_str()));
    }

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
