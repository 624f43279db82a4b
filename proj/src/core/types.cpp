#include "pem/core/types.hpp"

#include <cmath>

namespace pem {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double wrap_angle(double radians) {
  double wrapped = std::remainder(radians, kTwoPi);
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

PolarCoord to_polar(EgoPoint p) {
  // bearing is counterclockwise from +y, so a point on -x is at +pi/2
  return {std::hypot(p.x, p.y), wrap_angle(std::atan2(-p.x, p.y))};
}

EgoPoint to_cartesian(PolarCoord p) {
  return {-p.r * std::sin(p.theta), p.r * std::cos(p.theta)};
}

bool is_valid(PolarCoord p) {
  return std::isfinite(p.r) && std::isfinite(p.theta) && p.r >= 0.0 &&
         p.theta > -kPi && p.theta <= kPi;
}

OcclusionLevel occlusion_from_fraction(double visible_fraction) {
  if (visible_fraction < 0.4) return OcclusionLevel::vis0;
  if (visible_fraction < 0.6) return OcclusionLevel::vis1;
  if (visible_fraction < 0.8) return OcclusionLevel::vis2;
  return OcclusionLevel::vis3;
}

std::optional<OcclusionLevel> occlusion_from_index(int index) {
  if (index < 0 || index >= kOcclusionLevels) return std::nullopt;
  return static_cast<OcclusionLevel>(index);
}

std::string_view to_string(OcclusionLevel level) {
  switch (level) {
    case OcclusionLevel::vis0: return "vis0";
    case OcclusionLevel::vis1: return "vis1";
    case OcclusionLevel::vis2: return "vis2";
    case OcclusionLevel::vis3: return "vis3";
  }
  return "vis?";
}

}  // namespace pem
