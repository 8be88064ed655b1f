#include "cde/core.hpp"

#include <algorithm>
#include <cmath>

namespace cde {

Bounds::Bounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
        throw ConfigError("bounds: lower and upper have different lengths");
    if (lower_.empty())
        throw ConfigError("bounds: dimension must be positive");
    for (std::size_t j = 0; j < lower_.size(); ++j) {
        if (!(lower_[j] < upper_[j]))
            throw ConfigError("bounds: lower bound not below upper bound in dimension " +
                              std::to_string(j));
    }
}

Bounds Bounds::uniform(std::size_t dimension, double lower, double upper) {
    return Bounds(std::vector<double>(dimension, lower), std::vector<double>(dimension, upper));
}

bool Bounds::contains(std::span<const double> v) const {
    if (v.size() != dimension()) return false;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (!(v[j] >= lower_[j] && v[j] <= upper_[j])) return false;
    return true;
}

std::size_t Population::best_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < members.size(); ++i)
        if (better(members[i].eval, members[best].eval)) best = i;
    return best;
}

namespace {

// 0 = invalid (non-finite), 1 = infeasible, 2 = feasible
int feasibility_class(const Evaluation& e) noexcept {
    if (!std::isfinite(e.objective) || !std::isfinite(e.violation)) return 0;
    return e.violation > 0.0 ? 1 : 2;
}

Ordering compare_keys(double a, double b) noexcept {
    if (a < b) return Ordering::a_better;
    if (b < a) return Ordering::b_better;
    return Ordering::tie;
}

}  // namespace

Ordering compare_fitness(const Evaluation& a, const Evaluation& b) noexcept {
    const int ca = feasibility_class(a);
    const int cb = feasibility_class(b);
    if (ca != cb) return ca > cb ? Ordering::a_better : Ordering::b_better;
    switch (ca) {
        case 2: return compare_keys(a.objective, b.objective);
        case 1: return compare_keys(a.violation, b.violation);
        default: return Ordering::tie;
    }
}

DecisionVector repair_to_bounds(std::span<const double> v, const Bounds& bounds) {
    if (v.size() != bounds.dimension())
        throw ConfigError("repair_to_bounds: vector has dimension " + std::to_string(v.size()) +
                          ", bounds have " + std::to_string(bounds.dimension()));
    DecisionVector out(v.begin(), v.end());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::clamp(out[j], bounds.lower(j), bounds.upper(j));
    return out;
}

std::string to_string(Ordering o) {
    switch (o) {
        case Ordering::a_better: return "a-better";
        case Ordering::b_better: return "b-better";
        case Ordering::tie: return "tie";
    }
    return "?";
}

}  // namespace cde
