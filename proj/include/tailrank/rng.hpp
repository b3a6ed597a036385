#pragma once

#include <cstdint>

namespace tailrank {

// splitmix64; used both as a stream-derivation hash and as the core
// generator so that simulation output does not depend on the standard
// library's distribution implementations.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    // Deterministic substream: same (seed, ids) always yields the same stream.
    Rng derive(uint64_t a, uint64_t b = 0) const {
        uint64_t s = state_;
        s = splitmix64(s ^ splitmix64(a + 0x9e3779b97f4a7c15ULL));
        s = splitmix64(s ^ splitmix64(b + 0x3c6ef372fe94f82bULL));
        return Rng(s);
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n); n > 0.
    uint64_t next_below(uint64_t n) {
        // Rejection sampling keeps the draw exactly uniform.
        uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    uint64_t state_;
};

}  // namespace tailrank
