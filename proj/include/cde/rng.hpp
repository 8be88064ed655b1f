#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cde {

/// Seeded random stream. All derived draws (uniform reals, bounded integers,
/// normal deviates) are computed here from raw 64-bit engine output rather
/// than through <random> distributions, whose algorithms differ between
/// standard library implementations. One stream per trial; never shared.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Raw engine output.
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Unbiased (rejection on the tail).
    std::size_t uniform_index(std::size_t n);

    /// N(mu, sigma) via Box-Muller; the second variate is discarded so each
    /// call consumes exactly two engine outputs.
    double normal(double mu, double sigma);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Draw from N(mu, sigma) conditioned on (lo, hi] by rejection.
double sample_truncated_normal(RngStream& rng, double mu, double sigma, double lo, double hi);

}  // namespace cde
