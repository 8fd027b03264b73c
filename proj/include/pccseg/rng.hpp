#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace pccseg {

/// The engine behind every seeded run. Draw helpers below avoid the
/// implementation-defined std distributions so streams match across standard libraries.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform index in [0, n); n > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

}  // namespace pccseg
