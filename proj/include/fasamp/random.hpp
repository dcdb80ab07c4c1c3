#pragma once

#include "fasamp/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace fasamp {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream (a, b) under a master seed. Distinct (a, b) give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(master) ^ (a + 0x632be59bd9b4e019ULL)) ^ (b + 0x85157af5ULL));
}

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
inline cdouble complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace fasamp
