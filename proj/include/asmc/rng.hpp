#pragma once

#include <cstdint>
#include <random>

namespace asmc {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser. Derives statistically independent stream seeds from one run seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Named streams so that perturbing one stage never shifts another stage's draws.
namespace stream {
inline constexpr std::uint64_t connectivity = 1;
inline constexpr std::uint64_t encoding = 2;
inline constexpr std::uint64_t index_layout = 3;
inline constexpr std::uint64_t table = 4;
inline constexpr std::uint64_t jitter = 5;
inline constexpr std::uint64_t folds = 6;
inline constexpr std::uint64_t counterfactual = 7;
inline constexpr std::uint64_t oracle = 8;
} // namespace stream

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace asmc
