#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cde/experiments.hpp"

using namespace cde;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cde_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << s;
}

std::string error_of(const std::string& text) {
    try {
        parse_plan(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentPlan small_plan() {
    return parse_plan(R"({"problems": ["cbd", "sphere:3"], "algorithms": ["de", "cde"],
                          "population_size": 10, "trials": 3, "base_seed": 5,
                          "budget": {"fixed": 200}})");
}

TrialResult row(std::string problem, std::string algorithm, std::size_t trial, double objective,
                double violation = 0.0) {
    TrialResult r;
    r.problem = std::move(problem);
    r.algorithm = std::move(algorithm);
    r.trial = trial;
    r.best_objective = objective;
    r.best_violation = violation;
    return r;
}

}  // namespace

TEST_CASE("plan parsing") {
    const auto plan = parse_plan(R"(
        // comment
        {"problems": ["cbd", "sphere:10"],
         "algorithms": ["de", {"name": "cde-pd", "preset": "cde", "per_dimension_scaling": true},
                       {"name": "slow", "preset": "de", "F": 0.9, "Cr": {"mu": 0.3, "sigma": 0.1},
                        "population_size": 20, "strategy": "best_1"}],
         "trials": 7, "base_seed": 11, "budget": {"per_dimension": 500}})");
    CHECK(plan.problems.size() == 2);
    CHECK(plan.trials == 7);
    CHECK(plan.seed_for(3) == 14);
    CHECK(budget_for(plan.budget, 10) == 5000);
    CHECK(plan.algorithm("cde-pd").config.params.per_dimension_scaling);
    CHECK(plan.algorithm("cde-pd").config.strategy == MutationKind::winner_to_best_1);
    const auto& slow = plan.algorithm("slow").config;
    CHECK(slow.population_size == 20);
    CHECK(slow.strategy == MutationKind::best_1);
    CHECK(std::get<FixedValue>(slow.params.scale).value == 0.9);
    CHECK(std::get<NormalSampled>(slow.params.crossover).sigma == 0.1);
    CHECK(plan.algorithm("de").config.population_size == 100);

    // round trip
    const auto again = parse_plan(dump_plan(plan));
    CHECK(dump_plan(again) == dump_plan(plan));
}

TEST_CASE("plan errors name the offending key") {
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": ["de"], "trails": 3})").find("'trails'") !=
          std::string::npos);
    CHECK(error_of(R"({"problems": ["nope"], "algorithms": ["de"]})").find("'problems[0]'") != std::string::npos);
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": ["jade"]})").find("'algorithms[0]'") !=
          std::string::npos);
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": [{"name": "x", "preset": "cde", "Fx": 1}]})")
              .find("'algorithms[0].Fx'") != std::string::npos);
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": ["de"], "trials": "many"})").find("'trials'") !=
          std::string::npos);
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": ["de"], "budget": {"fixed": 10, "x": 1}})")
              .find("'budget'") != std::string::npos);
    CHECK(error_of(R"({"algorithms": ["de"]})").find("'problems'") != std::string::npos);
    CHECK(error_of(R"({"problems": ["cbd"], "algorithms": ["de", "de"]})").find("duplicate") != std::string::npos);
    CHECK(error_of("{not json").find("malformed") != std::string::npos);
    // budget below one population
    CHECK_THROWS_AS(parse_plan(R"({"problems": ["cbd"], "algorithms": ["de"], "budget": {"fixed": 50}})"),
                    ConfigError);
}

TEST_CASE("execute covers the grid in plan order") {
    const auto plan = small_plan();
    const auto results = execute(plan);
    REQUIRE(results.size() == 2 * 2 * 3);
    CHECK(results[0].problem == "cbd");
    CHECK(results[0].algorithm == "de");
    CHECK(results[3].algorithm == "cde");
    CHECK(results[6].problem == "sphere:3");
    for (const auto& r : results) {
        CHECK(r.seed == plan.seed_for(r.trial));
        CHECK(r.fe_used == 200);
        CHECK(r.trace.points.back().fe == 200);
        for (std::size_t k = 1; k < r.trace.points.size(); ++k)
            REQUIRE(r.trace.points[k].best_objective <= r.trace.points[k - 1].best_objective);
    }
}

TEST_CASE("execute is deterministic across reruns and job counts") {
    TempDir a("a"), b("b");
    const auto plan = small_plan();
    execute(plan, {a.path, 1, {}});
    execute(plan, {b.path, 4, {}});
    CHECK(slurp(a.path / "results.csv") == slurp(b.path / "results.csv"));
    CHECK(slurp(trace_path(a.path, "sphere:3", "cde", 2)) == slurp(trace_path(b.path, "sphere:3", "cde", 2)));
    CHECK(trace_path(a.path, "sphere:3", "cde", 2).filename() == "sphere-3__cde__t2.csv");
    CHECK(fs::exists(a.path / "plan.json"));

    const auto loaded = load_results(a.path / "results.csv");
    REQUIRE(loaded.size() == 12);
    const auto direct = run_cell(plan, loaded[4].problem, loaded[4].algorithm, loaded[4].trial);
    CHECK(loaded[4].best_objective == direct.best_objective);
    CHECK(loaded[4].best_vector == direct.best_vector);
    CHECK(load_trace(trace_path(a.path, "cbd", "de", 0)).points == run_cell(plan, "cbd", "de", 0).trace.points);
}

TEST_CASE("resume recomputes only missing cells") {
    TempDir dir("resume");
    const auto plan = small_plan();
    execute(plan, {dir.path, 2, {}});
    const std::string full = slurp(dir.path / "results.csv");

    // drop one row and leave a torn half-line at the end
    std::istringstream in(full);
    std::string line, kept;
    int n = 0;
    while (std::getline(in, line))
        if (n++ != 5) kept += line + "\n";
    kept += "sphere:3,cde,2,7,20";
    spit(dir.path / "results.csv", kept);

    std::vector<std::string> recomputed;
    execute(plan, {dir.path, 1, [&](const TrialResult& r) { recomputed.push_back(r.problem + "/" + r.algorithm); }});
    CHECK(recomputed == std::vector<std::string>{"cbd/cde"});
    CHECK(slurp(dir.path / "results.csv") == full);

    // a different base seed invalidates every stored cell
    auto reseeded = plan;
    reseeded.base_seed = 99;
    std::size_t count = 0;
    execute(reseeded, {dir.path, 1, [&](const TrialResult&) { ++count; }});
    CHECK(count == 12);
}

TEST_CASE("load_results rejects corruption in the middle") {
    TempDir dir("corrupt");
    spit(dir.path / "results.csv", std::string(kResultsHeader) + "\ncbd,de,0,1,10,garbage,0,1\ncbd,de,1,2,10,1,0,1\n");
    CHECK_THROWS(load_results(dir.path / "results.csv"));
    CHECK(load_results(dir.path / "missing.csv").empty());
}

TEST_CASE("result rows round-trip doubles exactly") {
    TrialResult r = row("wbd", "cde", 4, 1.0 / 3.0, 1e-300);
    r.seed = 9;
    r.fe_used = 10000;
    r.best_vector = {0.1, -2.5e-17, 123456789.125};
    TempDir dir("roundtrip");
    spit(dir.path / "results.csv", format_results_csv({r}));
    const auto back = load_results(dir.path / "results.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].best_objective == r.best_objective);
    CHECK(back[0].best_violation == r.best_violation);
    CHECK(back[0].best_vector == r.best_vector);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("summarize examples") {
    std::vector<TrialResult> results{row("p", "de", 0, 1.0), row("p", "de", 1, 3.0), row("p", "cde", 0, 0.5),
                                     row("p", "cde", 1, 0.5, 2.0), row("q", "de", 0, 9.0)};
    const auto s = summarize(results, "p");
    REQUIRE(s.size() == 2);
    CHECK(s[0].algorithm == "de");
    CHECK(s[0].mean == 2.0);
    CHECK(s[0].std == doctest::Approx(std::sqrt(2.0)));
    CHECK(s[1].infeasible == 1);
    CHECK(s[1].std == 0.0);

    CHECK_THROWS_AS(summarize(results, "p", {"de", "jade"}), MissingDataError);
    CHECK_THROWS_AS(summarize(results, "r"), MissingDataError);
    results.push_back(row("p", "de", 2, 4.0));
    CHECK_THROWS_AS(summarize(results, "p"), MissingDataError);
}

TEST_CASE("summaries do not depend on result order") {
    const auto results = execute(small_plan());
    auto shuffled = results;
    std::reverse(shuffled.begin(), shuffled.end());
    for (const auto& p : {"cbd", "sphere:3"}) {
        const auto a = summarize(results, p, {"de", "cde"});
        const auto b = summarize(shuffled, p, {"de", "cde"});
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].mean == doctest::Approx(b[k].mean).epsilon(1e-12));
            CHECK(a[k].std == doctest::Approx(b[k].std).epsilon(1e-12));
        }
    }
}

TEST_CASE("convergence csv averages best-so-far with step interpolation") {
    TrialResult a = row("p", "de", 0, 1.0);
    a.trace.points = {{10, 5.0}, {20, 3.0}};
    TrialResult b = row("p", "de", 1, 1.0);
    b.trace.points = {{10, 7.0}, {15, 1.0}, {20, 1.0}};
    CHECK(format_convergence_csv({a, b}, "p", {"de"}) == "fe,de\n10,6\n15,3\n20,2\n");
}

TEST_CASE("collect_samples groups by problem and algorithm") {
    const std::vector<TrialResult> results{row("p", "de", 0, 1.0), row("p", "cde", 0, 2.0), row("p", "de", 1, 3.0)};
    const auto samples = collect_samples(results, {"p"}, {"cde", "de"});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].find("de")->values == std::vector<double>{1.0, 3.0});
    CHECK(samples[0].find("cde")->values == std::vector<double>{2.0});
}
