#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace splab {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hashes a seed together with a tuple of counters. Distinct tuples give
/// statistically independent 64-bit outputs, so any draw can be recomputed
/// from its coordinates alone, regardless of generation order.
constexpr std::uint64_t counter_key(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x3c6ef372fe94f82bULL));
  return h;
}

/// Uniform draw in [0, 1) from a counter key.
constexpr double key_to_unit(std::uint64_t key) { return static_cast<double>(key >> 11) * 0x1.0p-53; }

inline double counter_uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return key_to_unit(counter_key(seed, counters));
}

/// Sequential generator for bulk draws (noise vectors, covariates). Each
/// logical stream is seeded from a counter key so streams never overlap.
class Stream {
public:
  explicit Stream(std::uint64_t key) : engine_(key) {}
  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) : engine_(counter_key(seed, counters)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace splab
