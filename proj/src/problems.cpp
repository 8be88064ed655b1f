#include "cde/problems.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cde {

Problem::Problem(std::string name, Bounds bounds, ScalarFunction objective,
                 std::vector<ScalarFunction> constraints, std::vector<bool> integer_mask,
                 std::optional<double> known_best)
    : name_(std::move(name)),
      bounds_(std::move(bounds)),
      objective_(std::move(objective)),
      constraints_(std::move(constraints)),
      integer_mask_(std::move(integer_mask)),
      known_best_(known_best) {
    if (integer_mask_.empty()) integer_mask_.assign(bounds_.dimension(), false);
    if (integer_mask_.size() != bounds_.dimension())
        throw ConfigError("problem " + name_ + ": integrality mask length differs from dimension");
    if (!objective_) throw ConfigError("problem " + name_ + ": missing objective");
}

bool Problem::has_integer_dimensions() const noexcept {
    return std::find(integer_mask_.begin(), integer_mask_.end(), true) != integer_mask_.end();
}

DecisionVector Problem::effective_point(std::span<const double> v) const {
    if (v.size() != dimension())
        throw ConfigError("problem " + name_ + ": expected dimension " + std::to_string(dimension()) +
                          ", got " + std::to_string(v.size()));
    DecisionVector x(v.begin(), v.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!integer_mask_[j]) continue;
        x[j] = std::clamp(std::floor(x[j] + 0.5), bounds_.lower(j), bounds_.upper(j));
    }
    return x;
}

std::vector<double> Problem::constraint_values(std::span<const double> v) const {
    const DecisionVector x = effective_point(v);
    std::vector<double> g;
    g.reserve(constraints_.size());
    for (const auto& c : constraints_) g.push_back(c(x));
    return g;
}

Evaluation Problem::evaluate_uncounted(std::span<const double> v) const {
    const DecisionVector x = effective_point(v);
    Evaluation e;
    e.objective = objective_(x);
    double violation = 0.0;
    for (const auto& c : constraints_) {
        const double g = c(x);
        if (std::isnan(g)) {
            violation = std::numeric_limits<double>::infinity();
            break;
        }
        if (g > kFeasibilityTolerance) violation += g;
    }
    e.violation = violation;
    return e;
}

EvaluationBudget::EvaluationBudget(std::uint64_t max_fe) : max_fe_(max_fe) {
    if (max_fe == 0) throw ConfigError("evaluation budget must be positive");
}

std::uint64_t EvaluationBudget::consume() {
    if (used_fe_ >= max_fe_)
        throw BudgetExhausted("evaluation budget of " + std::to_string(max_fe_) + " FE exhausted");
    return ++used_fe_;
}

double aggregate_violation(std::span<const double> constraint_values) noexcept {
    double total = 0.0;
    for (double g : constraint_values)
        if (g > kFeasibilityTolerance) total += g;
    return total;
}

Evaluation evaluate(const Problem& p, std::span<const double> v, EvaluationBudget& budget) {
    if (v.size() != p.dimension())
        throw ConfigError("evaluate: dimension mismatch for problem " + p.name());
    const std::uint64_t index = budget.consume();
    Evaluation e = p.evaluate_uncounted(v);
    e.fe_index = index;
    return e;
}

namespace {

using X = std::span<const double>;

}  // namespace

Problem make_cbd() {
    auto f = [](X x) { return 0.0624 * (x[0] + x[1] + x[2] + x[3] + x[4]); };
    auto g = [](X x) {
        return 61.0 / std::pow(x[0], 3) + 37.0 / std::pow(x[1], 3) + 19.0 / std::pow(x[2], 3) +
               7.0 / std::pow(x[3], 3) + 1.0 / std::pow(x[4], 3) - 1.0;
    };
    return Problem("cbd", Bounds::uniform(5, 0.01, 100.0), f, {g}, {}, 1.3400);
}

Problem make_cbhd() {
    // Lower bounds of width, depth and length sit at 1e-6 instead of 0 so the
    // objective denominator never vanishes.
    Bounds b({1e-6, 1e-6, 1e-6, 0.0}, {100.0, 100.0, 100.0, 5.0});
    auto span_len = [](X x) { return x[0] + std::sqrt(std::abs(x[2] * x[2] - x[1] * x[1])); };
    auto f = [span_len](X x) { return 5.885 * x[3] * (x[0] + x[2]) / span_len(x); };
    std::vector<ScalarFunction> g{
        [span_len](X x) { return -x[3] * x[1] * (0.4 * x[0] + x[2] / 6.0) + 8.94 * span_len(x); },
        [span_len](X x) {
            return -x[3] * x[1] * x[1] * (0.2 * x[0] + x[2] / 12.0) +
                   2.2 * std::pow(8.94 * span_len(x), 4.0 / 3.0);
        },
        [](X x) { return -x[3] + 0.0156 * x[0] + 0.15; },
        [](X x) { return -x[3] + 0.0156 * x[2] + 0.15; },
        [](X x) { return -x[3] + 1.05; },
        [](X x) { return -x[2] + x[1]; },
    };
    return Problem("cbhd", std::move(b), f, std::move(g), {}, 6.843);
}

Problem make_gtd() {
    auto f = [](X x) {
        const double d = 1.0 / 6.931 - (x[2] * x[1]) / (x[0] * x[3]);
        return d * d;
    };
    return Problem("gtd", Bounds::uniform(4, 12.0, 60.0), f, {}, std::vector<bool>(4, true),
                   2.700857e-12);
}

Problem make_tbtd() {
    constexpr double length = 100.0;
    constexpr double load = 2.0;
    constexpr double stress = 2.0;
    const double s2 = std::numbers::sqrt2;
    auto f = [s2](X x) { return (2.0 * s2 * x[0] + x[1]) * length; };
    std::vector<ScalarFunction> g{
        [s2](X x) {
            return (s2 * x[0] + x[1]) / (s2 * x[0] * x[0] + 2.0 * x[0] * x[1]) * load - stress;
        },
        [s2](X x) { return x[1] / (s2 * x[0] * x[0] + 2.0 * x[0] * x[1]) * load - stress; },
        [s2](X x) { return 1.0 / (s2 * x[1] + x[0]) * load - stress; },
    };
    return Problem("tbtd", Bounds::uniform(2, 1e-6, 1.0), f, std::move(g), {}, 263.8958);
}

// Best-of-30 CDE runs at 100,000 FE (seeds 1..30), see tests/test_problems.cpp.
inline constexpr double kTcdReferenceOptimum = 26.499496875949646;

Problem make_tcd() {
    constexpr double load = 2500.0;
    constexpr double yield_stress = 500.0;
    constexpr double modulus = 0.85e6;
    constexpr double column_length = 250.0;
    constexpr double pi = std::numbers::pi;
    auto f = [](X x) { return 9.8 * x[0] * x[1] + 2.0 * x[0]; };
    std::vector<ScalarFunction> g{
        [](X x) { return load / (pi * x[0] * x[1] * yield_stress) - 1.0; },
        [](X x) {
            return 8.0 * load * column_length * column_length /
                       (pi * pi * pi * modulus * x[0] * x[1] * (x[0] * x[0] + x[1] * x[1])) -
                   1.0;
        },
    };
    return Problem("tcd", Bounds({2.0, 0.2}, {14.0, 8.0}), f, std::move(g), {},
                   kTcdReferenceOptimum);
}

Problem make_wbd() {
    constexpr double load = 6000.0;
    constexpr double beam_length = 14.0;
    constexpr double modulus = 30e6;
    constexpr double shear_modulus = 12e6;
    constexpr double tau_max = 13600.0;
    constexpr double sigma_max = 30000.0;
    constexpr double delta_max = 0.25;
    const double s2 = std::numbers::sqrt2;

    auto cost = [](X x) { return 1.10471 * x[0] * x[0] * x[1] + 0.04811 * x[2] * x[3] * (14.0 + x[1]); };
    auto shear = [s2](X x) {
        const double primary = load / (s2 * x[0] * x[1]);
        const double moment = load * (beam_length + x[1] / 2.0);
        const double half_sum = (x[0] + x[2]) / 2.0;
        const double radius = std::sqrt(x[1] * x[1] / 4.0 + half_sum * half_sum);
        const double polar = 2.0 * s2 * x[0] * x[1] * (x[1] * x[1] / 12.0 + half_sum * half_sum);
        const double secondary = moment * radius / polar;
        return std::sqrt(primary * primary + 2.0 * primary * secondary * x[1] / (2.0 * radius) +
                         secondary * secondary);
    };
    auto bending = [](X x) { return 6.0 * load * beam_length / (x[3] * x[2] * x[2]); };
    auto deflection = [](X x) {
        return 4.0 * load * std::pow(beam_length, 3) / (modulus * std::pow(x[2], 3) * x[3]);
    };
    auto buckling = [](X x) {
        return 4.013 * modulus * std::sqrt(x[2] * x[2] * std::pow(x[3], 6) / 36.0) /
               (beam_length * beam_length) *
               (1.0 - x[2] / (2.0 * beam_length) * std::sqrt(modulus / (4.0 * shear_modulus)));
    };
    std::vector<ScalarFunction> g{
        [shear](X x) { return shear(x) - tau_max; },
        [bending](X x) { return bending(x) - sigma_max; },
        [deflection](X x) { return deflection(x) - delta_max; },
        [](X x) { return x[0] - x[3]; },
        [buckling](X x) { return load - buckling(x); },
        [](X x) { return 0.125 - x[0]; },
        [cost](X x) { return cost(x) - 5.0; },
    };
    return Problem("wbd", Bounds({0.1, 0.1, 0.1, 0.1}, {2.0, 10.0, 10.0, 2.0}), cost, std::move(g),
                   {}, 1.687);
}

Problem make_classical(const std::string& name, std::size_t dimension) {
    if (dimension == 0) throw ConfigError("classical function " + name + ": dimension must be >= 1");
    const double two_pi = 2.0 * std::numbers::pi;
    const std::string id = name + ":" + std::to_string(dimension);
    if (name == "sphere") {
        auto f = [](X x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
        return Problem(id, Bounds::uniform(dimension, -5.12, 5.12), f, {}, {}, 0.0);
    }
    if (name == "rosenbrock") {
        auto f = [](X x) {
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i) {
                const double a = x[i + 1] - x[i] * x[i];
                const double b = 1.0 - x[i];
                s += 100.0 * a * a + b * b;
            }
            return s;
        };
        return Problem(id, Bounds::uniform(dimension, -5.0, 10.0), f, {}, {}, 0.0);
    }
    if (name == "rastrigin") {
        auto f = [two_pi](X x) {
            double s = 10.0 * static_cast<double>(x.size());
            for (double v : x) s += v * v - 10.0 * std::cos(two_pi * v);
            return s;
        };
        return Problem(id, Bounds::uniform(dimension, -5.12, 5.12), f, {}, {}, 0.0);
    }
    if (name == "ackley") {
        auto f = [two_pi](X x) {
            const double n = static_cast<double>(x.size());
            double sq = 0.0;
            double cs = 0.0;
            for (double v : x) {
                sq += v * v;
                cs += std::cos(two_pi * v);
            }
            return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 +
                   std::numbers::e;
        };
        return Problem(id, Bounds::uniform(dimension, -32.768, 32.768), f, {}, {}, 0.0);
    }
    if (name == "griewank") {
        auto f = [](X x) {
            double s = 0.0;
            double p = 1.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                s += x[i] * x[i] / 4000.0;
                p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
            }
            return 1.0 + s - p;
        };
        return Problem(id, Bounds::uniform(dimension, -600.0, 600.0), f, {}, {}, 0.0);
    }
    throw ConfigError("unknown classical function '" + name + "'; " + problem_name_help());
}

std::vector<std::string> engineering_problem_names() {
    return {"cbd", "cbhd", "gtd", "tbtd", "tcd", "wbd"};
}

std::vector<std::string> classical_function_names() {
    return {"sphere", "rosenbrock", "rastrigin", "ackley", "griewank"};
}

std::string problem_name_help() {
    std::ostringstream os;
    os << "valid problems:";
    for (const auto& n : engineering_problem_names()) os << ' ' << n;
    for (const auto& n : classical_function_names()) os << ' ' << n << ":D";
    return os.str();
}

Problem make_problem(const std::string& spec) {
    if (spec == "cbd") return make_cbd();
    if (spec == "cbhd") return make_cbhd();
    if (spec == "gtd") return make_gtd();
    if (spec == "tbtd") return make_tbtd();
    if (spec == "tcd") return make_tcd();
    if (spec == "wbd") return make_wbd();
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string base = spec.substr(0, colon);
        const std::string dim_text = spec.substr(colon + 1);
        std::size_t dim = 0;
        const auto [ptr, ec] = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), dim);
        const auto& names = classical_function_names();
        if (ec == std::errc() && ptr == dim_text.data() + dim_text.size() && dim > 0 &&
            std::find(names.begin(), names.end(), base) != names.end())
            return make_classical(base, dim);
    }
    throw ConfigError("unknown problem '" + spec + "'; " + problem_name_help());
}

}  // namespace cde
