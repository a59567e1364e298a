#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace e5sh::sim {

// splitmix64; used to derive independent sub-seeds from one experiment seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Named sub-stream: every random choice in an experiment derives from the
// single config seed plus a stable stream label.
inline uint64_t derive_seed(uint64_t master, std::string_view stream, uint64_t index = 0) {
    return splitmix64(master ^ splitmix64(fnv1a(stream) + index));
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view stream, uint64_t index = 0) {
    return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace e5sh::sim
