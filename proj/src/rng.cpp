#include "cde/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "cde/core.hpp"

namespace cde {

std::size_t RngStream::uniform_index(std::size_t n) {
    if (n == 0) throw ConfigError("uniform_index: empty range");
    const std::uint64_t range = n;
    // Largest multiple of `range` representable; draws at or above it are rejected.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

double RngStream::normal(double mu, double sigma) {
    // 1 - uniform() lies in (0, 1], keeping the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mu + sigma * z;
}

double sample_truncated_normal(RngStream& rng, double mu, double sigma, double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("sample_truncated_normal: need lo < hi");
    if (!(sigma > 0.0)) throw ConfigError("sample_truncated_normal: need sigma > 0");
    for (;;) {
        const double x = rng.normal(mu, sigma);
        if (x > lo && x <= hi) return x;
    }
}

}  // namespace cde
