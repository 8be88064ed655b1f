#include "cde/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cde/experiments.hpp"
#include "cde/stats.hpp"

namespace cde::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string problem;
    std::string algo = "cde";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> budget;
    std::size_t population = 100;
    std::size_t jobs = 1;
    double alpha = 0.05;
    std::string reference = "cde";
    std::string out_dir;
    std::string trace_file;
    std::string plan_file;
    std::string results_dir;
    bool no_timestamp = false;
    bool summary_line = false;
};

std::string timestamp_line() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << "\n";
    return os.str();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string join_vector(const DecisionVector& v, const char* sep) {
    std::string s;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) s += sep;
        s += format_double(v[j]);
    }
    return s;
}

// Aligned plain-text rendering of a table of strings.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    std::ostringstream os;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            std::string cell = r[c];
            if (c + 1 < r.size()) cell.resize(width[c], ' ');
            line += (c ? "  " : "") + cell;
        }
        os << line << "\n";
    }
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(3) << v;
    return os.str();
}

int cmd_list_problems(std::ostream& out) {
    std::vector<std::vector<std::string>> rows{{"name", "D", "constraints", "integer", "known_best"}};
    auto add = [&](const Problem& p) {
        rows.push_back({p.name(), std::to_string(p.dimension()), std::to_string(p.constraint_count()),
                        p.has_integer_dimensions() ? "yes" : "no",
                        p.known_best() ? format_double(*p.known_best()) : "-"});
    };
    for (const auto& n : engineering_problem_names()) add(make_problem(n));
    for (const auto& n : classical_function_names()) add(make_classical(n, 2));
    out << render_table(rows);
    out << "classical functions take any dimension: <name>:<D>, e.g. sphere:30\n";
    out << "algorithms:";
    for (const auto& a : algorithm_names()) out << ' ' << a;
    out << "\n";
    return ok;
}

int cmd_run(const Options& o, std::ostream& out) {
    const Problem problem = make_problem(o.problem);
    RunConfig cfg = algorithm_preset(o.algo);
    cfg.population_size = o.population;
    cfg.seed = *o.seed;
    cfg.max_fe = o.budget.value_or(10'000);
    const RunResult r = run(problem, cfg);
    const DecisionVector x = problem.effective_point(r.best.vector);

    if (!o.trace_file.empty()) write_text(o.trace_file, format_trace_csv(r.trace));

    if (o.summary_line) {
        nlohmann::json j{{"problem", problem.name()},
                         {"algorithm", o.algo},
                         {"seed", r.seed},
                         {"fe_used", r.fe_used},
                         {"best_objective", r.best.eval.objective},
                         {"best_violation", r.best.eval.violation},
                         {"feasible", r.best.eval.feasible()},
                         {"best_vector", x}};
        out << j.dump() << "\n";
        return ok;
    }
    out << "problem         " << problem.name() << "\n"
        << "algorithm       " << o.algo << "\n"
        << "seed            " << r.seed << "\n"
        << "best_objective  " << format_double(r.best.eval.objective) << "\n"
        << "feasible        " << (r.best.eval.feasible() ? "yes" : "no") << "\n"
        << "violation       " << format_double(r.best.eval.violation) << "\n"
        << "best_vector     " << join_vector(x, " ") << "\n"
        << "fe_used         " << r.fe_used << "\n"
        << "generations     " << r.generations << "\n";
    return ok;
}

std::vector<std::string> algorithm_order(const ExperimentPlan& plan) {
    std::vector<std::string> names;
    for (const auto& a : plan.algorithms) names.push_back(a.name);
    return names;
}

std::string format_summary_csv(const ExperimentPlan& plan, const std::vector<TrialResult>& results) {
    std::string csv = "problem,algorithm,trials,mean,std,infeasible\n";
    for (const auto& p : plan.problems)
        for (const auto& s : summarize(results, p, algorithm_order(plan)))
            csv += p + "," + s.algorithm + "," + std::to_string(s.trials) + "," + format_double(s.mean) + "," +
                   format_double(s.std) + "," + std::to_string(s.infeasible) + "\n";
    return csv;
}

std::string format_summary_text(const ExperimentPlan& plan, const std::vector<TrialResult>& results) {
    std::vector<std::vector<std::string>> rows{{"problem", "algorithm", "mean", "std", "infeasible"}};
    for (const auto& p : plan.problems)
        for (const auto& s : summarize(results, p, algorithm_order(plan)))
            rows.push_back({p, s.algorithm, sci(s.mean), sci(s.std),
                            std::to_string(s.infeasible) + "/" + std::to_string(s.trials)});
    return render_table(rows);
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
    ExperimentPlan plan = load_plan(o.plan_file);
    plan.base_seed = *o.seed;
    if (o.budget) plan.budget = FixedBudget{*o.budget};
    plan.validate();

    const fs::path dir = o.out_dir.empty() ? fs::path("results") : fs::path(o.out_dir);
    ExecuteOptions opts;
    opts.out_dir = dir;
    opts.jobs = o.jobs;
    std::size_t finished = 0;
    opts.on_cell_done = [&](const TrialResult& r) {
        ++finished;
        err << "[" << finished << "] " << r.problem << " " << r.algorithm << " trial " << r.trial << " -> "
            << format_double(r.best_objective) << "\n";
    };
    const auto results = execute(plan, opts);

    write_text(dir / "summary.csv", format_summary_csv(plan, results));
    const std::string text = format_summary_text(plan, results);
    write_text(dir / "summary.txt", (o.no_timestamp ? std::string() : timestamp_line()) + text);
    fs::create_directories(dir / "convergence");
    for (const auto& p : plan.problems) {
        std::string file = p;
        for (char& c : file)
            if (c == ':') c = '-';
        write_text(dir / "convergence" / (file + ".csv"),
                   format_convergence_csv(results, p, algorithm_order(plan)));
    }
    out << text;
    out << results.size() << " results in " << (dir / "results.csv").string() << " (" << finished
        << " computed)\n";
    return ok;
}

int cmd_compare(const Options& o, std::ostream& out) {
    const fs::path dir = o.results_dir;
    if (!fs::exists(dir / "results.csv"))
        throw std::runtime_error("no results.csv in " + dir.string());
    const auto results = load_results(dir / "results.csv");

    std::vector<std::string> problems;
    std::vector<std::string> algorithms;
    std::size_t trials = 0;
    if (fs::exists(dir / "plan.json")) {
        const ExperimentPlan plan = load_plan(dir / "plan.json");
        problems = plan.problems;
        algorithms = algorithm_order(plan);
        trials = plan.trials;
    } else {
        for (const auto& r : results) {
            if (std::find(problems.begin(), problems.end(), r.problem) == problems.end())
                problems.push_back(r.problem);
            if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end())
                algorithms.push_back(r.algorithm);
            trials = std::max(trials, r.trial + 1);
        }
    }
    if (std::find(algorithms.begin(), algorithms.end(), o.reference) == algorithms.end())
        throw ConfigError("reference algorithm '" + o.reference + "' not present in " + dir.string());
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");

    std::set<std::tuple<std::string, std::string, std::size_t>> present;
    for (const auto& r : results) present.emplace(r.problem, r.algorithm, r.trial);
    std::vector<std::string> missing;
    for (const auto& p : problems)
        for (const auto& a : algorithms)
            for (std::size_t t = 0; t < trials; ++t)
                if (!present.count({p, a, t})) missing.push_back(p + "/" + a + "/trial " + std::to_string(t));
    if (!missing.empty()) {
        std::string msg = "incomplete result grid, missing " + std::to_string(missing.size()) + " cell(s):";
        for (const auto& m : missing) msg += "\n  " + m;
        throw MissingDataError(msg);
    }

    const auto samples = collect_samples(results, problems, algorithms);
    const auto matrix = stats::verdicts(o.reference, samples, o.alpha);
    std::vector<std::map<std::string, double>> means;
    for (const auto& p : problems) {
        std::map<std::string, double> row;
        for (const auto& s : summarize(results, p, algorithms)) row[s.algorithm] = s.mean;
        means.push_back(std::move(row));
    }
    const auto ranks = stats::average_ranks(algorithms, means);

    std::string csv = "problem,algorithm,mean,std,verdict_vs_reference,p_raw,p_adjusted\n";
    std::vector<std::vector<std::string>> rows{{"problem", "algorithm", "mean", "std", "verdict", "p_raw", "p_adj"}};
    for (const auto& p : problems) {
        for (const auto& s : summarize(results, p, algorithms)) {
            std::string verdict, p_raw, p_adj;
            if (s.algorithm != o.reference) {
                const auto& e = matrix.at(p, s.algorithm);
                verdict = stats::symbol(e.verdict);
                p_raw = format_double(e.p_raw);
                p_adj = format_double(e.p_adjusted);
            }
            csv += p + "," + s.algorithm + "," + format_double(s.mean) + "," + format_double(s.std) + "," +
                   verdict + "," + p_raw + "," + p_adj + "\n";
            rows.push_back({p, s.algorithm, sci(s.mean), sci(s.std), verdict.empty() ? "ref" : verdict,
                            p_raw.empty() ? "" : sci(std::stod(p_raw)), p_adj.empty() ? "" : sci(std::stod(p_adj))});
        }
    }
    csv += "\nsummary,algorithm,plus,approx,minus,avg_rank\n";
    std::vector<std::vector<std::string>> footer{{"algorithm", "+/~/-", "avg_rank"}};
    for (const auto& a : algorithms) {
        std::string counts_csv = ",,";
        std::string counts_txt = "reference";
        if (a != o.reference) {
            const auto c = matrix.counts(a);
            counts_csv = std::to_string(c.plus) + "," + std::to_string(c.approx) + "," + std::to_string(c.minus);
            counts_txt = std::to_string(c.plus) + "/" + std::to_string(c.approx) + "/" + std::to_string(c.minus);
        }
        std::ostringstream rank;
        rank << std::fixed << std::setprecision(2) << ranks.rank_of(a);
        csv += "summary," + a + "," + counts_csv + "," + format_double(ranks.rank_of(a)) + "\n";
        footer.push_back({a, counts_txt, rank.str()});
    }

    const fs::path out_dir = o.out_dir.empty() ? dir : fs::path(o.out_dir);
    fs::create_directories(out_dir);
    write_text(out_dir / "comparison.csv", csv);
    std::ostringstream txt;
    if (!o.no_timestamp) txt << timestamp_line();
    txt << "reference: " << o.reference << ", alpha = " << o.alpha << " (rank-sum + Holm)\n\n"
        << render_table(rows) << "\n" << render_table(footer);
    write_text(out_dir / "comparison.txt", txt.str());
    out << txt.str();
    return ok;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Competitive differential evolution: runs, experiments and statistical comparison", "cde"};
    app.require_subcommand(1);

    auto add_seed = [&](CLI::App* sub) { return sub->add_option("--seed", o.seed, "Random seed"); };

    auto* list = app.add_subcommand("list-problems", "List registered problems and algorithms");
    add_seed(list);

    auto* run_cmd = app.add_subcommand("run", "Run one optimization");
    run_cmd->add_option("--problem", o.problem, "Problem name, e.g. cbd or sphere:30")->required();
    run_cmd->add_option("--algo", o.algo, "Algorithm: cde, de, de-cur1, de-best1");
    add_seed(run_cmd)->required();
    run_cmd->add_option("--budget", o.budget, "Maximum fitness evaluations (default 10000)");
    run_cmd->add_option("--pop", o.population, "Population size (default 100)");
    run_cmd->add_option("--trace", o.trace_file, "Write the convergence trace (fe,best_objective) here");
    run_cmd->add_flag("--summary-line", o.summary_line, "Print a single JSON line instead of the report");

    auto* exp_cmd = app.add_subcommand("experiment", "Run every cell of a plan file");
    exp_cmd->add_option("plan", o.plan_file, "Plan file")->required();
    add_seed(exp_cmd)->required();
    exp_cmd->add_option("--budget", o.budget, "Override the plan budget with a fixed FE count");
    exp_cmd->add_option("--jobs", o.jobs, "Parallel cells")->check(CLI::PositiveNumber);
    exp_cmd->add_option("--out", o.out_dir, "Results directory (default ./results)");
    exp_cmd->add_flag("--no-timestamp", o.no_timestamp, "Omit the timestamp header in text reports");

    auto* cmp_cmd = app.add_subcommand("compare", "Statistical comparison of an experiment's results");
    cmp_cmd->add_option("results", o.results_dir, "Results directory")->required();
    cmp_cmd->add_option("--reference", o.reference, "Reference algorithm (default cde)");
    cmp_cmd->add_option("--alpha", o.alpha, "Significance level (default 0.05)");
    cmp_cmd->add_option("--out", o.out_dir, "Where to write comparison.csv/.txt (default: results dir)");
    cmp_cmd->add_flag("--no-timestamp", o.no_timestamp, "Omit the timestamp header");
    add_seed(cmp_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (!app.get_subcommands().empty()) err << app.get_subcommands().front()->help();
        else err << app.help();
        return usage_error;
    }

    try {
        if (*list) return cmd_list_problems(out);
        if (*run_cmd) return cmd_run(o, out);
        if (*exp_cmd) return cmd_experiment(o, out, err);
        if (*cmp_cmd) return cmd_compare(o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return runtime_error;
    }
    return usage_error;
}

}  // namespace cde::cli
