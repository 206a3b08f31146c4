#pragma once

#include <cstdint>
#include <random>

namespace edagcn {

/// The single generator used everywhere. mt19937_64 output is fixed by the
/// standard, so a seed reproduces the same raw stream on every platform.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of `seed`. Streams for distinct indices are
/// unrelated, so work items can be drawn in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng{derive_seed(seed, index)};
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace edagcn
