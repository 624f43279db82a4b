#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace pem {

/// Seeded generator with a fixed draw recipe so that streams are reproducible
/// across standard libraries: uniforms take the top 53 bits of mt19937_64,
/// normals come from Box-Muller on two uniforms (both outputs returned).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Two independent standard normals.
  std::pair<double, double> normal_pair();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of a PEM session after `resets` resets of a session started with
/// `base_seed`. Local and remote perception use the same rule.
std::uint64_t session_seed(std::uint64_t base_seed, std::uint64_t resets);

}  // namespace pem
