#pragma once

#include <cstdint>

namespace elsim {

// splitmix64: used for seed derivation so that independent streams never
// share state. Stable across platforms, unlike <random> distributions.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent 64-bit seed from (base, lane). lane distinguishes
// trial indices, node indices, stream purposes, etc.
inline uint64_t derive_seed(uint64_t base, uint64_t lane) {
    uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (lane + 0x51ed270b39a9f434ULL));
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// xoshiro256** with splitmix-expanded seeding. All randomness in the
// simulator flows through this generator; reruns are bit-identical.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, bound) via 128-bit multiply; bound must be nonzero.
    uint64_t below(uint64_t bound) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next()) * bound) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    uint64_t between(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; transmission delays live in this interval.
    double unit_open_low() { return 1.0 - unit(); }

    bool chance(double p) { return unit() < p; }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

}  // namespace elsim
