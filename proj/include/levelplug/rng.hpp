#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace levelplug {

/// The generator behind every sampler: 64-bit Mersenne Twister
/// (std::mt19937_64), seeded directly with the 64-bit seed. Replication k of
/// an experiment with base seed s uses seed s + k, so adding replications
/// never perturbs earlier ones.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

inline std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t index) {
    return base_seed + index;
}

/// Uniform draw on [0, 1) from the top 53 bits of one generator output.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard exponential by inversion, -log(1 - U).
inline double standard_exponential(Rng& rng) {
    return -std::log1p(-uniform01(rng));
}

}  // namespace levelplug
