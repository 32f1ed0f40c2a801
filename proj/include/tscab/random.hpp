#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tscab/errors.hpp"

namespace tscab {

// Seeded random source with hand-rolled draws. mt19937_64's raw output is
// pinned by the standard; the draw helpers below avoid std::*_distribution,
// whose results vary between standard libraries, so a seed reproduces the
// same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    // Derive an independent child stream; depends only on the original seed
    // and the stream id, not on how much this stream has been consumed.
    Rng fork(std::uint64_t stream_id) const {
        std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ull * (stream_id + 1);
        x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
        x ^= x >> 27; x *= 0x94D049BB133111EBull;
        x ^= x >> 31;
        return Rng(x);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, bound). bound = 0 is an error.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw ArgumentError("Rng::next_below: bound must be positive");
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do { x = engine_(); } while (x >= limit);
        return x % bound;
    }

    // Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Exponential with the given rate (mean 1/rate).
    double next_exponential(double rate) {
        if (rate <= 0) throw ArgumentError("Rng::next_exponential: rate must be positive");
        return -std::log1p(-next_unit()) / rate;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace tscab
