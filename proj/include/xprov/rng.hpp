// Deterministic 64-bit PRNG plumbing. Every randomized component in the
// library derives its stream from a seed through these functions, so corpora,
// patterns, and payloads are reproducible bit-for-bit from a single integer.
#pragma once

#include <cstdint>

namespace xprov {

// splitmix64 output function (Steele/Lea/Flood finalizer).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream seed i of a master seed: seed_i = splitmix64(master + i * GAMMA).
// This is the published mixing rule; corpora regenerate from (kind, seed, size)
// alone, so the rule must never change.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + index * 0x9E3779B97F4A7C15ULL);
}

// Small sequential generator over the splitmix64 counter stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_++); }

    // Uniform in [0, n) by 128-bit multiply; n must be nonzero.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform int in [lo, hi], inclusive.
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool next_bool() { return (next_u64() & 1u) != 0; }

private:
    std::uint64_t state_;
};

}  // namespace xprov
