#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pem/core/grid.hpp"

namespace pem {

/// Two-state detection chain. a00 = 1 - a01 and a10 = 1 - a11.
struct TransitionMatrix {
  double a01 = 0.0;  ///< P(detected | previously undetected)
  double a11 = 0.0;  ///< P(detected | previously detected)

  double a00() const { return 1.0 - a01; }
  double a10() const { return 1.0 - a11; }

  bool operator==(const TransitionMatrix&) const = default;
};

/// Long-run detected fraction a01 / (1 + a01 - a11). The doubly absorbing
/// chain (a01 = 0, a11 = 1) returns 0 because tracks start undetected.
double stationary_detection(const TransitionMatrix& tm);

/// Bivariate Gaussian over (radial ratio, bearing offset).
struct ErrorDistribution {
  double mu_r = 1.0;
  double mu_theta = 0.0;
  double sigma_r = 1e-12;
  double sigma_theta = 1e-12;
  double rho = 0.0;

  double cov_r_theta() const { return rho * sigma_r * sigma_theta; }

  bool operator==(const ErrorDistribution&) const = default;
};

struct ConditionParams {
  TransitionMatrix transition;
  ErrorDistribution error;

  bool operator==(const ConditionParams&) const = default;
};

/// Learned perception error model: one parameter pair per condition.
/// Immutable once constructed and validated; safe to share across threads.
struct PemModel {
  GridSpec grid;
  std::vector<ConditionParams> conditions;
  std::string metadata;

  const ConditionParams& at(Condition c) const { return conditions.at(static_cast<std::size_t>(c.index)); }

  /// Every condition set to `params`.
  static PemModel uniform(const GridSpec& grid, const ConditionParams& params,
                          std::string metadata = {});

  bool operator==(const PemModel&) const = default;
};

/// Identity model: always detects, perceived position equals ground truth.
ConditionParams perfect_params();
/// Never detects anything.
ConditionParams blind_params();

/// Raised on invariant violations; `field()` names the offending parameter.
class ModelError : public std::runtime_error {
 public:
  ModelError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

void validate(const ConditionParams& params);
void validate(const PemModel& model);

}  // namespace pem
