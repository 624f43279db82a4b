#include "pem/sim/policy.hpp"

#include <algorithm>
#include <cmath>

namespace pem::sim {

void validate(const PolicyConfig& cfg) {
  if (!(cfg.a_comf > 0.0 && cfg.a_comf <= cfg.a_max)) throw std::invalid_argument("policy needs 0 < a_comf <= a_max");
  if (!(cfg.corridor_half_width > 0.0)) throw std::invalid_argument("corridor half width must be positive");
  if (!(cfg.headway_s >= 0.0 && cfg.standstill_m >= 0.0 && cfg.obstacle_half_length >= 0.0)) {
    throw std::invalid_argument("headway, standstill and obstacle half length must be non-negative");
  }
}

std::optional<EgoPoint> lead_object(std::span<const CartesianDetection> perceived, const PolicyConfig& cfg) {
  std::optional<EgoPoint> best;
  for (const auto& p : perceived) {
    if (!(p.position.y > 0.0) || std::abs(p.position.x) > cfg.corridor_half_width) continue;
    if (!best || p.position.y < best->y) best = p.position;
  }
  return best;
}

double policy_gap(double longitudinal, const ActorState& ego, const PolicyConfig& cfg) {
  return longitudinal - ego.footprint.length / 2.0 - cfg.obstacle_half_length;
}

double braking_deceleration(double gap, double speed, const PolicyConfig& cfg) {
  const double safe = speed * cfg.headway_s + cfg.standstill_m;
  const double stop = speed * speed / (2.0 * cfg.a_max);
  if (gap >= safe) return 0.0;
  if (gap <= stop) return cfg.a_max;
  return cfg.a_max * (safe - gap) / (safe - stop);
}

double driving_policy(std::span<const CartesianDetection> perceived, const ActorState& ego, double cruise_speed,
                      double dt, const PolicyConfig& cfg) {
  if (const auto lead = lead_object(perceived, cfg)) {
    const double decel = braking_deceleration(policy_gap(lead->y, ego, cfg), ego.speed, cfg);
    if (decel > 0.0) return -decel;
  }
  return std::clamp((cruise_speed - ego.speed) / dt, -cfg.a_comf, cfg.a_comf);
}

}  // namespace pem::sim
