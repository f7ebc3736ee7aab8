#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace episir {

// All stochastic code draws through these helpers so that a fixed seed gives
// the same realisation on every build. Replicate r of an ensemble is seeded
// with base_seed + r.
using Rng = std::mt19937_64;

// 53-bit draw in (0, 1]; never 0, so log() below is safe.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform01(rng)) / rate;
}

// Unbiased draw from {0, ..., n-1} (multiply-shift with rejection).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t cutoff = (0 - n) % n;
    while (lo < cutoff) {
      m = static_cast<unsigned __int128>(rng()) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) <= p; }

}  // namespace episir
