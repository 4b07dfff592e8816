#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ssn {

/// SplitMix64 (Steele, Lea, Flood 2014). Used wherever the artifact needs a
/// seeded stream it fully controls: Monte-Carlo draws, synthetic data,
/// random table classifiers. One stream per logical task, never shared
/// across threads; parallel code derives per-index streams with stream().
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do { x = next(); } while (x >= limit);
        return x % bound;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Standard normal via Box-Muller (no cached spare; two draws per call).
    double normal() {
        double u1;
        do { u1 = uniform01(); } while (u1 <= 0.0);
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Independent stream for worker/sample `index` under a run seed.
    /// Deterministic in (seed, index) regardless of scheduling.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
        std::uint64_t s = mixer.next();
        return SplitMix64(s);
    }

private:
    std::uint64_t state_;
};

} // namespace ssn
