#pragma once

#include <cstdint>

namespace htq {

// splitmix64 (Vigna); used for seeding and stream derivation.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// xoshiro256++ (Blackman & Vigna). Hand-rolled so sequences are identical
// across compilers and standard libraries; per-seed determinism is contractual.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    // Stream derivation rule: stream(base, i) seeds a fresh engine from
    // splitmix64(splitmix64(base) ^ (i + 1)), so distinct indices give
    // decorrelated streams independent of how work is scheduled.
    static Rng stream(std::uint64_t base_seed, std::uint64_t index) {
        SplitMix64 sm(base_seed);
        return Rng(SplitMix64(sm.next() ^ (index + 1)).next());
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound); Lemire's rejection method.
    std::uint64_t next_below(std::uint64_t bound) {
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = -bound % bound;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next_u64()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace htq
