#include "pem/core/random.hpp"

#include <cmath>
#include <numbers>

namespace pem {

std::pair<double, double> Rng::normal_pair() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t session_seed(std::uint64_t base_seed, std::uint64_t resets) {
  return splitmix64(base_seed ^ splitmix64(resets));
}

}  // namespace pem
