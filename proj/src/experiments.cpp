#include "cde/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cde {

using nlohmann::json;

std::uint64_t budget_for(const BudgetRule& rule, std::size_t dimension) {
    if (const auto* fixed = std::get_if<FixedBudget>(&rule)) return fixed->fe;
    return std::get<PerDimensionBudget>(rule).multiplier * dimension;
}

void ExperimentPlan::validate() const {
    if (problems.empty()) throw ConfigError("plan: 'problems' is empty");
    if (algorithms.empty()) throw ConfigError("plan: 'algorithms' is empty");
    if (trials == 0) throw ConfigError("plan: 'trials' must be positive");
    std::set<std::string> seen;
    for (const auto& a : algorithms) {
        if (!seen.insert(a.name).second) throw ConfigError("plan: duplicate algorithm '" + a.name + "'");
        a.config.params.validate();
    }
    seen.clear();
    for (const auto& name : problems) {
        if (!seen.insert(name).second) throw ConfigError("plan: duplicate problem '" + name + "'");
        const Problem p = make_problem(name);
        for (const auto& a : algorithms) {
            RunConfig cfg = a.config;
            cfg.max_fe = budget_for(budget, p.dimension());
            cfg.validate();
        }
    }
}

const AlgorithmSpec& ExperimentPlan::algorithm(const std::string& name) const {
    for (const auto& a : algorithms)
        if (a.name == name) return a;
    throw ConfigError("plan has no algorithm '" + name + "'");
}

namespace {

[[noreturn]] void plan_error(const std::string& key, const std::string& what) {
    throw ConfigError("plan: key '" + key + "': " + what);
}

template <typename T>
T get_as(const json& node, const std::string& key) {
    try {
        return node.get<T>();
    } catch (const json::exception&) {
        plan_error(key, "wrong type");
    }
}

std::uint64_t get_count(const json& node, const std::string& key) {
    if (!node.is_number_integer() || node.get<std::int64_t>() < 0)
        plan_error(key, "expected a non-negative integer");
    return node.get<std::uint64_t>();
}

ParamMode parse_mode(const json& node, const std::string& key) {
    if (node.is_number()) return FixedValue{node.get<double>()};
    if (node.is_object() && node.contains("mu") && node.contains("sigma"))
        return NormalSampled{get_as<double>(node["mu"], key + ".mu"),
                             get_as<double>(node["sigma"], key + ".sigma")};
    plan_error(key, "expected a number or {\"mu\": ..., \"sigma\": ...}");
}

json dump_mode(const ParamMode& mode) {
    if (const auto* f = std::get_if<FixedValue>(&mode)) return f->value;
    const auto& s = std::get<NormalSampled>(mode);
    return json{{"mu", s.mu}, {"sigma", s.sigma}};
}

AlgorithmSpec parse_algorithm(const json& node, std::size_t index, std::size_t population) {
    const std::string key = "algorithms[" + std::to_string(index) + "]";
    AlgorithmSpec spec;
    if (node.is_string()) {
        spec.name = node.get<std::string>();
        try {
            spec.config = algorithm_preset(spec.name);
        } catch (const ConfigError& e) {
            plan_error(key, e.what());
        }
        spec.config.population_size = population;
        return spec;
    }
    if (!node.is_object()) plan_error(key, "expected a name or an object");
    static const std::set<std::string> known{"name", "preset", "population_size", "strategy",
                                             "F", "Cr", "per_dimension_scaling"};
    for (const auto& [k, _] : node.items())
        if (!known.count(k)) plan_error(key + "." + k, "unknown key");
    if (!node.contains("name")) plan_error(key + ".name", "missing");
    spec.name = get_as<std::string>(node["name"], key + ".name");
    const std::string preset =
        node.contains("preset") ? get_as<std::string>(node["preset"], key + ".preset") : spec.name;
    try {
        spec.config = algorithm_preset(preset);
    } catch (const ConfigError& e) {
        plan_error(key + ".preset", e.what());
    }
    spec.config.population_size = population;
    if (node.contains("population_size"))
        spec.config.population_size = get_count(node["population_size"], key + ".population_size");
    if (node.contains("strategy")) {
        try {
            spec.config.strategy = parse_mutation_kind(get_as<std::string>(node["strategy"], key + ".strategy"));
        } catch (const ConfigError& e) {
            plan_error(key + ".strategy", e.what());
        }
    }
    if (node.contains("F")) spec.config.params.scale = parse_mode(node["F"], key + ".F");
    if (node.contains("Cr")) spec.config.params.crossover = parse_mode(node["Cr"], key + ".Cr");
    if (node.contains("per_dimension_scaling"))
        spec.config.params.per_dimension_scaling =
            get_as<bool>(node["per_dimension_scaling"], key + ".per_dimension_scaling");
    try {
        spec.config.params.validate();
    } catch (const ConfigError& e) {
        plan_error(key, e.what());
    }
    return spec;
}

}  // namespace

ExperimentPlan parse_plan(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("plan: malformed file: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("plan: top level must be an object");

    static const std::set<std::string> known{"problems", "algorithms", "trials", "base_seed", "budget",
                                             "population_size"};
    for (const auto& [k, _] : root.items())
        if (!known.count(k)) plan_error(k, "unknown key");

    ExperimentPlan plan;
    if (!root.contains("problems") || !root["problems"].is_array()) plan_error("problems", "expected a list");
    for (std::size_t i = 0; i < root["problems"].size(); ++i) {
        const std::string key = "problems[" + std::to_string(i) + "]";
        const auto name = get_as<std::string>(root["problems"][i], key);
        try {
            (void)make_problem(name);
        } catch (const ConfigError& e) {
            plan_error(key, e.what());
        }
        plan.problems.push_back(name);
    }

    std::size_t population = 100;
    if (root.contains("population_size")) population = get_count(root["population_size"], "population_size");

    if (!root.contains("algorithms") || !root["algorithms"].is_array())
        plan_error("algorithms", "expected a list");
    for (std::size_t i = 0; i < root["algorithms"].size(); ++i)
        plan.algorithms.push_back(parse_algorithm(root["algorithms"][i], i, population));

    if (root.contains("trials")) plan.trials = get_count(root["trials"], "trials");
    if (root.contains("base_seed")) plan.base_seed = get_count(root["base_seed"], "base_seed");

    if (root.contains("budget")) {
        const json& b = root["budget"];
        if (b.is_object() && b.size() == 1 && b.contains("fixed"))
            plan.budget = FixedBudget{get_count(b["fixed"], "budget.fixed")};
        else if (b.is_object() && b.size() == 1 && b.contains("per_dimension"))
            plan.budget = PerDimensionBudget{get_count(b["per_dimension"], "budget.per_dimension")};
        else
            plan_error("budget", "expected {\"fixed\": FE} or {\"per_dimension\": multiplier}");
    }

    plan.validate();
    return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read plan file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_plan(os.str());
}

namespace {

// Every field the preset sets is written out explicitly; it only has to exist.
std::string preset_for(MutationKind kind) {
    switch (kind) {
        case MutationKind::rand_1: return "de";
        case MutationKind::cur_1: return "de-cur1";
        case MutationKind::best_1: return "de-best1";
        case MutationKind::winner_to_best_1: return "cde";
    }
    return "cde";
}

}  // namespace

std::string dump_plan(const ExperimentPlan& plan) {
    json root;
    root["problems"] = plan.problems;
    json algs = json::array();
    for (const auto& a : plan.algorithms) {
        algs.push_back(json{{"name", a.name},
                            {"preset", preset_for(a.config.strategy)},
                            {"population_size", a.config.population_size},
                            {"strategy", to_string(a.config.strategy)},
                            {"F", dump_mode(a.config.params.scale)},
                            {"Cr", dump_mode(a.config.params.crossover)},
                            {"per_dimension_scaling", a.config.params.per_dimension_scaling}});
    }
    root["algorithms"] = algs;
    root["trials"] = plan.trials;
    root["base_seed"] = plan.base_seed;
    if (const auto* f = std::get_if<FixedBudget>(&plan.budget))
        root["budget"] = json{{"fixed", f->fe}};
    else
        root["budget"] = json{{"per_dimension", std::get<PerDimensionBudget>(plan.budget).multiplier}};
    return root.dump(2) + "\n";
}

TrialResult run_cell(const ExperimentPlan& plan, const std::string& problem_name,
                     const std::string& algorithm, std::size_t trial) {
    const Problem problem = make_problem(problem_name);
    RunConfig cfg = plan.algorithm(algorithm).config;
    cfg.seed = plan.seed_for(trial);
    cfg.max_fe = budget_for(plan.budget, problem.dimension());
    cfg.trace_checkpoints.clear();  // one point per generation

    const RunResult run_result = run(problem, cfg);
    TrialResult r;
    r.problem = problem_name;
    r.algorithm = algorithm;
    r.trial = trial;
    r.seed = cfg.seed;
    r.fe_used = run_result.fe_used;
    r.best_objective = run_result.best.eval.objective;
    r.best_violation = run_result.best.eval.violation;
    r.best_vector = problem.effective_point(run_result.best.vector);
    r.trace = run_result.trace;
    return r;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (c == ':' || c == '/' || c == '\\') c = '-';
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

using CellKey = std::tuple<std::string, std::string, std::size_t>;

}  // namespace

std::string format_result_row(const TrialResult& r) {
    std::string row = r.problem + "," + r.algorithm + "," + std::to_string(r.trial) + "," +
                      std::to_string(r.seed) + "," + std::to_string(r.fe_used) + "," +
                      format_double(r.best_objective) + "," + format_double(r.best_violation) + ",";
    for (std::size_t j = 0; j < r.best_vector.size(); ++j) {
        if (j) row += ';';
        row += format_double(r.best_vector[j]);
    }
    return row;
}

std::string format_results_csv(const std::vector<TrialResult>& results) {
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto& r : results) out += format_result_row(r) + "\n";
    return out;
}

std::vector<TrialResult> load_results(const std::filesystem::path& path) {
    std::vector<TrialResult> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const bool complete_tail = content.empty() || content.back() == '\n';

    std::vector<std::string> lines = split(content, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) return out;
    if (lines.front() != kResultsHeader)
        throw std::runtime_error(path.string() + ": unexpected header");

    for (std::size_t k = 1; k < lines.size(); ++k) {
        const bool last = k + 1 == lines.size();
        try {
            const auto f = split(lines[k], ',');
            if (f.size() != 8) throw std::runtime_error("expected 8 columns");
            TrialResult r;
            r.problem = f[0];
            r.algorithm = f[1];
            r.trial = parse_u64(f[2]);
            r.seed = parse_u64(f[3]);
            r.fe_used = parse_u64(f[4]);
            r.best_objective = parse_double(f[5]);
            r.best_violation = parse_double(f[6]);
            for (const auto& v : split(f[7], ';')) r.best_vector.push_back(parse_double(v));
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            if (last && !complete_tail) break;  // interrupted append
            throw std::runtime_error(path.string() + ":" + std::to_string(k + 1) + ": " + e.what());
        }
    }
    return out;
}

std::string format_trace_csv(const ConvergenceTrace& trace) {
    std::string out = "fe,best_objective\n";
    for (const auto& p : trace.points) out += std::to_string(p.fe) + "," + format_double(p.best_objective) + "\n";
    return out;
}

ConvergenceTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace " + path.string());
    ConvergenceTrace trace;
    std::string line;
    std::getline(in, line);
    if (line != "fe,best_objective") throw std::runtime_error(path.string() + ": unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 2) throw std::runtime_error(path.string() + ": malformed row");
        trace.points.push_back({parse_u64(f[0]), parse_double(f[1])});
    }
    return trace;
}

std::filesystem::path trace_path(const std::filesystem::path& out_dir, const std::string& problem,
                                 const std::string& algorithm, std::size_t trial) {
    return out_dir / "traces" /
           (sanitize(problem) + "__" + sanitize(algorithm) + "__t" + std::to_string(trial) + ".csv");
}

std::vector<TrialResult> execute(const ExperimentPlan& plan, const ExecuteOptions& options) {
    plan.validate();

    std::vector<CellKey> cells;
    for (const auto& p : plan.problems)
        for (const auto& a : plan.algorithms)
            for (std::size_t t = 0; t < plan.trials; ++t) cells.emplace_back(p, a.name, t);

    std::map<CellKey, TrialResult> done;
    std::filesystem::path results_file;
    std::ofstream appender;
    if (options.out_dir) {
        std::filesystem::create_directories(*options.out_dir / "traces");
        results_file = *options.out_dir / "results.csv";
        for (auto& r : load_results(results_file)) {
            CellKey key{r.problem, r.algorithm, r.trial};
            if (std::find(cells.begin(), cells.end(), key) == cells.end()) continue;
            if (r.seed != plan.seed_for(r.trial)) continue;  // produced under a different base seed
            done.emplace(std::move(key), std::move(r));
        }
        // Rewrite so the appender starts from a clean, complete file.
        std::vector<TrialResult> kept;
        for (const auto& c : cells)
            if (auto it = done.find(c); it != done.end()) kept.push_back(it->second);
        write_file(results_file, format_results_csv(kept));
        appender.open(results_file, std::ios::binary | std::ios::app);
        if (!appender) throw std::runtime_error("cannot append to " + results_file.string());
    }

    std::vector<CellKey> pending;
    for (const auto& c : cells)
        if (!done.count(c)) pending.push_back(c);

    std::mutex store_lock;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= pending.size()) return;
            const auto& [problem, algorithm, trial] = pending[k];
            try {
                TrialResult r = run_cell(plan, problem, algorithm, trial);
                if (options.out_dir)
                    write_file(trace_path(*options.out_dir, problem, algorithm, trial), format_trace_csv(r.trace));
                std::lock_guard lock(store_lock);
                if (appender.is_open()) {
                    appender << format_result_row(r) << '\n';
                    appender.flush();
                }
                if (options.on_cell_done) options.on_cell_done(r);
                done.emplace(pending[k], std::move(r));
            } catch (...) {
                std::lock_guard lock(store_lock);
                if (!failure) failure = std::current_exception();
                next = pending.size();
                return;
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<TrialResult> results;
    results.reserve(cells.size());
    for (const auto& c : cells) results.push_back(done.at(c));
    if (options.out_dir) {
        appender.close();
        write_file(results_file, format_results_csv(results));
        write_file(*options.out_dir / "plan.json", dump_plan(plan));
    }
    return results;
}

std::vector<AlgorithmSummary> summarize(const std::vector<TrialResult>& results, const std::string& problem,
                                        const std::vector<std::string>& algorithms) {
    std::vector<std::string> order = algorithms;
    std::map<std::string, std::vector<const TrialResult*>> by_alg;
    for (const auto& r : results) {
        if (r.problem != problem) continue;
        if (algorithms.empty() && std::find(order.begin(), order.end(), r.algorithm) == order.end())
            order.push_back(r.algorithm);
        by_alg[r.algorithm].push_back(&r);
    }
    if (order.empty()) throw MissingDataError("no results for problem " + problem);

    std::vector<AlgorithmSummary> out;
    for (const auto& alg : order) {
        const auto it = by_alg.find(alg);
        if (it == by_alg.end()) throw MissingDataError("missing cell: " + alg + " on " + problem);
        std::vector<double> values;
        AlgorithmSummary s;
        s.algorithm = alg;
        for (const auto* r : it->second) {
            values.push_back(r->best_objective);
            if (!r->feasible()) ++s.infeasible;
        }
        const auto ms = stats::mean_std(values);
        s.trials = values.size();
        s.mean = ms.mean;
        s.std = ms.std;
        if (!out.empty() && out.front().trials != s.trials)
            throw MissingDataError("unequal trial counts on " + problem + ": " + out.front().algorithm + " has " +
                                   std::to_string(out.front().trials) + ", " + alg + " has " +
                                   std::to_string(s.trials));
        out.push_back(s);
    }
    return out;
}

std::string format_convergence_csv(const std::vector<TrialResult>& results, const std::string& problem,
                                   const std::vector<std::string>& algorithms) {
    std::set<std::uint64_t> fes;
    std::map<std::string, std::vector<const ConvergenceTrace*>> traces;
    for (const auto& r : results) {
        if (r.problem != problem || r.trace.points.empty()) continue;
        traces[r.algorithm].push_back(&r.trace);
        for (const auto& p : r.trace.points) fes.insert(p.fe);
    }
    std::string out = "fe";
    for (const auto& a : algorithms) out += "," + a;
    out += "\n";
    for (const std::uint64_t fe : fes) {
        out += std::to_string(fe);
        for (const auto& a : algorithms) {
            out += ",";
            const auto it = traces.find(a);
            if (it == traces.end()) continue;
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto* t : it->second) {
                // Step interpolation: last recorded value at or before fe.
                const auto& pts = t->points;
                auto up = std::upper_bound(pts.begin(), pts.end(), fe,
                                           [](std::uint64_t v, const TracePoint& p) { return v < p.fe; });
                if (up == pts.begin()) continue;
                sum += std::prev(up)->best_objective;
                ++count;
            }
            if (count) out += format_double(sum / static_cast<double>(count));
        }
        out += "\n";
    }
    return out;
}

std::vector<stats::ProblemSamples> collect_samples(const std::vector<TrialResult>& results,
                                                   const std::vector<std::string>& problems,
                                                   const std::vector<std::string>& algorithms) {
    std::vector<stats::ProblemSamples> out;
    for (const auto& p : problems) {
        stats::ProblemSamples ps;
        ps.problem = p;
        for (const auto& a : algorithms) {
            stats::SampleSet s;
            s.algorithm = a;
            for (const auto& r : results)
                if (r.problem == p && r.algorithm == a) s.values.push_back(r.best_objective);
            ps.samples.push_back(std::move(s));
        }
        out.push_back(std::move(ps));
    }
    return out;
}

}  // namespace cde
