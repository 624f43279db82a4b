#include "pem/core/model.hpp"

#include <cmath>

namespace pem {

double stationary_detection(const TransitionMatrix& tm) {
  const double denom = 1.0 + tm.a01 - tm.a11;
  if (denom <= 0.0) return 0.0;
  return tm.a01 / denom;
}

PemModel PemModel::uniform(const GridSpec& grid, const ConditionParams& params,
                           std::string metadata) {
  validate(grid);
  PemModel model;
  model.grid = grid;
  model.conditions.assign(static_cast<std::size_t>(grid.n_conditions()), params);
  model.metadata = std::move(metadata);
  return model;
}

ConditionParams perfect_params() {
  return {{1.0, 1.0}, {1.0, 0.0, 1e-12, 1e-12, 0.0}};
}

ConditionParams blind_params() {
  return {{0.0, 0.0}, {1.0, 0.0, 1e-12, 1e-12, 0.0}};
}

namespace {

void require_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ModelError(name, std::string(name) + " out of [0,1]");
  }
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) throw ModelError(name, std::string(name) + " is not finite");
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ModelError(name, std::string(name) + " must be positive and finite");
  }
}

}  // namespace

void validate(const ConditionParams& params) {
  require_probability(params.transition.a01, "a01");
  require_probability(params.transition.a11, "a11");
  require_finite(params.error.mu_r, "mu_r");
  require_finite(params.error.mu_theta, "mu_theta");
  require_positive(params.error.sigma_r, "sigma_r");
  require_positive(params.error.sigma_theta, "sigma_theta");
  if (!(std::abs(params.error.rho) < 1.0)) throw ModelError("rho", "rho out of (-1,1)");
}

void validate(const PemModel& model) {
  try {
    validate(model.grid);
  } catch (const GridError& e) {
    throw ModelError("grid", e.what());
  }
  if (model.conditions.size() != static_cast<std::size_t>(model.grid.n_conditions())) {
    throw ModelError("conditions", "expected " + std::to_string(model.grid.n_conditions()) +
                                       " conditions, got " +
                                       std::to_string(model.conditions.size()));
  }
  for (const auto& params : model.conditions) validate(params);
}

}  // namespace pem
