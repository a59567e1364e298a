#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace e5sh::sim {

// Portable draw recipes over mt19937_64. The standard distribution classes
// are implementation-defined; these fixed mappings keep seeded outputs
// reproducible across standard libraries.

// Uniform [0,1) from the 53 high bits.
inline double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * u01(rng);
}

// One standard normal via Box-Muller (cosine branch only; two uniforms per draw).
inline double normal01(std::mt19937_64& rng) {
    double u1 = u01(rng);
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    double u2 = u01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform integer in [0, n) by 64-bit rejection sampling.
inline uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace e5sh::sim
