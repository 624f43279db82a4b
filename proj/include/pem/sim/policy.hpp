#pragma once

#include <optional>
#include <span>
#include <stdexcept>

#include "pem/core/injector.hpp"
#include "pem/sim/geometry.hpp"

namespace pem::sim {

struct PolicyConfig {
  double a_comf = 1.5;             ///< m/s^2
  double a_max = 6.0;              ///< m/s^2
  double corridor_half_width = 1.5;  ///< m
  double headway_s = 1.5;
  double standstill_m = 2.0;
  /// Perceived objects are points; this much of the object is assumed to
  /// extend toward the ego when measuring the gap.
  double obstacle_half_length = 2.5;
};

void validate(const PolicyConfig& cfg);

/// Nearest perceived object in the ego corridor (|x| <= half width, y > 0),
/// by longitudinal offset.
std::optional<EgoPoint> lead_object(std::span<const CartesianDetection> perceived, const PolicyConfig& cfg);

/// Free space between the ego front and the assumed rear of an object
/// `longitudinal` meters ahead of the ego center.
double policy_gap(double longitudinal, const ActorState& ego, const PolicyConfig& cfg);

/// Deceleration (>= 0) commanded for `gap` at `speed`: 0 from
/// speed * headway + standstill upward, a_max at or below the stopping
/// distance speed^2 / (2 a_max), linear in between.
double braking_deceleration(double gap, double speed, const PolicyConfig& cfg);

/// Longitudinal acceleration command. Brakes for the corridor lead when the
/// braking law asks for it, otherwise tracks `cruise_speed` at up to a_comf
/// without overshooting it within `dt`.
double driving_policy(std::span<const CartesianDetection> perceived, const ActorState& ego, double cruise_speed,
                      double dt, const PolicyConfig& cfg);

}  // namespace pem::sim
