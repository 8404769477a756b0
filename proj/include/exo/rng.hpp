#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace exo {

// splitmix64: tiny counter-based generator with a strong avalanche finalizer.
// Chosen over <random> engines so that streams are reproducible bit-for-bit
// across standard libraries and platforms; every stochastic piece of the
// toolkit draws from one of these, seeded through derive_seed().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Unbiased integer in [0, bound); bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();  // rejection keeps the draw uniform
        return v % bound;
    }

    // 53-bit uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller transform; the paired second deviate is cached.
    double gaussian(double mean, double sd) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sd * spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return mean + sd * r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent per-module seed from the single session seed.  Each
// consumer gets its own stream id, so adding draws in one module never shifts
// the sequences seen by another.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace exo
