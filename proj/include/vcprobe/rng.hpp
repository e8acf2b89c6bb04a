#pragma once

#include <cstdint>
#include <random>

namespace vcprobe {

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-job seed for design point `point` and repetition `rep`:
//   mix64(mix64(mix64(master) ^ point) ^ rep)
// Depends only on the indices, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                                    std::uint64_t rep) noexcept {
    return mix64(mix64(mix64(master) ^ point) ^ rep);
}

// Independent sub-stream of a job seed (0: data generation, 1: training, ...).
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(seed ^ mix64(tag + 0x5851F42D4C957F2DULL));
}

// mt19937_64 output is fixed by the standard; these conversions are too,
// unlike std::uniform_real_distribution.
using Engine = std::mt19937_64;

inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform on the open interval (0, 1).
inline double uniform_open01(Engine& eng) {
    return (static_cast<double>(eng() >> 12) + 0.5) * 0x1.0p-52;
}

inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
    // Reject the top partial block so the modulo is unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace vcprobe
