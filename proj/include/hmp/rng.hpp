#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace hmp {

// Draw helpers with fully specified bit-level behavior. The standard
// distributions are implementation-defined, which would make checkpoints
// and generated datasets differ across standard libraries; these do not.

// splitmix64 finalizer; good avalanche for deriving stream seeds.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1), 53 mantissa bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi).
inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box-Muller (one draw per call; u1 in (0, 1]).
inline double gaussian(std::mt19937_64& g) {
    const double u1 = (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Uniform integer in [0, n) via 128-bit multiply-shift.
inline uint64_t below(std::mt19937_64& g, uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(g()) * n) >> 64);
}

// Fisher-Yates over 0..n-1.
inline std::vector<size_t> shuffled_indices(std::mt19937_64& g, size_t n) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(below(g, i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace hmp
