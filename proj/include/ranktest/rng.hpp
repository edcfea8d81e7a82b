#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

// Counter-based PRNG (SplitMix64 in counter mode): the k-th output is a pure
// function of (seed, k), so streams can be split across workers without
// changing the draw sequence.

namespace ranktest {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream derivation: hash_combine(seed, tag, tag, ...).
inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + b + (a << 6) + (a >> 2)));
}

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
    ((seed = hash_combine(seed, static_cast<std::uint64_t>(tags))), ...);
    return seed;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return splitmix64(seed_ ^ (counter_++ * 0xd1342543de82ef95ULL)); }

    // uniform on [0, 1) with 53 bits of precision
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1), never exactly 0 (safe for inverse-cdf transforms)
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t uniform_below(std::uint64_t bound) {
        // rejection-free would bias for huge bounds; bounds here are small
        return next_u64() % bound;
    }

    double normal();   // inverse-cdf transform, reproducible across platforms
    double cauchy() { return std::tan(3.14159265358979323846 * (uniform_pos() - 0.5)); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Standard normal cdf and quantile.
double normal_cdf(double t);
double normal_quantile(double u);  // absolute error below 1e-13 on (0,1)

inline double Rng::normal() { return normal_quantile(uniform_pos()); }

// k distinct values from {0, ..., n-1}, order irrelevant to callers
std::vector<int> sample_without_replacement(int n, int k, Rng& rng);

}  // namespace ranktest
