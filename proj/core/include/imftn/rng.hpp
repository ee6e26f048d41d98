#pragma once

#include <cstdint>
#include <random>

#include "imftn/types.hpp"

namespace imftn {

using Rng = std::mt19937_64;

/// Deterministically mixes a base seed with up to three stream keys
/// (splitmix64 finalizer). Distinct keys give statistically independent
/// streams; the same keys always give the same stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0,
                       std::uint64_t b = 0, std::uint64_t c = 0) noexcept;

inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0,
                       std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng{mix_seed(seed, a, b, c)};
}

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance (Box-Muller;
/// does not depend on library distribution internals).
cplx complex_normal(Rng& rng, double variance = 1.0) noexcept;

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) noexcept;

}  // namespace imftn
