#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bioid::rng {

using Engine = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed derivation for nested streams (run index, committee member, ...).
// derive_seed(base, a) and derive_seed(base, a, b) give decorrelated seeds
// that depend only on the tuple, never on call order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
  return mix64(base ^ mix64(a + 0x9E3779B97F4A7C15ull));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

// Uniform in [0,1) from the top 53 bits of the engine output. The standard
// distributions are implementation-defined; this keeps streams identical
// across standard libraries.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Box-Muller without the cached spare, so the stream position is a pure
// function of the call count.
inline double normal(Engine& eng) {
  constexpr double kTwoPi = 6.283185307179586476925287;
  double u1 = uniform01(eng);
  while (u1 == 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace bioid::rng
