#pragma once

#include <stdexcept>
#include <vector>

#include "pem/core/grid.hpp"

namespace pem::learn {

/// Symmetric 0/1 neighborhood over conditions, stored as sorted lists.
struct Adjacency {
  std::vector<std::vector<int>> neighbors;

  int size() const { return static_cast<int>(neighbors.size()); }
  int degree(int c) const { return static_cast<int>(neighbors[static_cast<std::size_t>(c)].size()); }
  bool linked(int a, int b) const;
  int components() const;
  int isolated() const;
};

/// Conditions are linked when they share an occlusion level and their cells
/// share an edge: same ring and adjacent sectors (wrapping around), or same
/// sector and adjacent rings.
Adjacency build_adjacency(const GridSpec& grid);

/// Spatial prior for one parameter field.
///
/// The latent field x = center + phi has the joint Gaussian prior
///   phi ~ N(0, [tau (D - alpha B)]^-1),
/// so each phi_c given the rest is Gaussian around alpha times the mean of its
/// neighbors with precision tau * degree(c). tau carries a Gamma(shape, rate)
/// prior and is optimized jointly with the field.
struct CarSpec {
  double alpha = 0.95;
  Adjacency adjacency;
  double precision_shape = 1.0;
  double precision_rate = 1.0;
  /// Fit deviations from the pooled data level instead of from zero.
  bool centered = false;
  /// Level used when centered and nothing is observed.
  double fallback_center = 0.0;
  int max_iterations = 10000;
  double tolerance = 1e-6;
};

enum class Likelihood {
  gaussian,  ///< value: observation on the latent scale; weight: its precision
  binomial,  ///< value: successes; weight: trials; latent is the log-odds
};

struct CarField {
  Likelihood likelihood = Likelihood::gaussian;
  std::vector<double> value;
  std::vector<double> weight;
  std::vector<bool> observed;
};

struct CarFit {
  std::vector<double> latent;  ///< MAP field on the latent scale
  double center = 0.0;
  double precision = 0.0;      ///< MAP tau
  double gradient_norm = 0.0;  ///< ||diag(H)^-1/2 grad|| at exit
  int iterations = 0;
  bool converged = false;
};

class CarError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Maximum a posteriori field under the CAR prior and the per-condition data
/// likelihood, by damped Newton iterations with tau profiled out. Stops when
/// the diagonally scaled gradient norm drops below `tolerance` or after
/// `max_iterations`; `converged` reports which. Throws CarError on malformed
/// input.
CarFit fit_car(const CarField& field, const CarSpec& spec);

}  // namespace pem::learn
