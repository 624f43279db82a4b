#include "pem/sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace pem::sim {

std::string_view to_string(ActorKind kind) {
  switch (kind) {
    case ActorKind::ego: return "ego";
    case ActorKind::vehicle: return "vehicle";
    case ActorKind::pedestrian: return "pedestrian";
  }
  return "?";
}

std::array<WorldPoint, 4> corners(const ActorState& actor) {
  const double c = std::cos(actor.heading), s = std::sin(actor.heading);
  const double hl = actor.footprint.length / 2.0, hw = actor.footprint.width / 2.0;
  auto at = [&](double f, double l) {
    return WorldPoint{actor.position.x + f * c - l * s, actor.position.y + f * s + l * c};
  };
  return {at(hl, -hw), at(hl, hw), at(-hl, hw), at(-hl, -hw)};
}

namespace {

double cross(WorldPoint o, WorldPoint a, WorldPoint b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool inside(const std::array<WorldPoint, 4>& poly, WorldPoint p) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (cross(poly[i], poly[(i + 1) % 4], p) < 0.0) return false;
  }
  return true;
}

bool segments_intersect(WorldPoint a, WorldPoint b, WorldPoint c, WorldPoint d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double point_segment(WorldPoint p, WorldPoint a, WorldPoint b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace

double footprint_distance(const ActorState& a, const ActorState& b) {
  const auto pa = corners(a), pb = corners(b);
  for (const auto& p : pa) {
    if (inside(pb, p)) return 0.0;
  }
  for (const auto& p : pb) {
    if (inside(pa, p)) return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    const WorldPoint a0 = pa[i], a1 = pa[(i + 1) % 4];
    for (std::size_t j = 0; j < 4; ++j) {
      const WorldPoint b0 = pb[j], b1 = pb[(j + 1) % 4];
      if (segments_intersect(a0, a1, b0, b1)) return 0.0;
      best = std::min({best, point_segment(a0, b0, b1), point_segment(b0, a0, a1)});
    }
  }
  return best;
}

EgoPoint to_ego_frame(const ActorState& ego, WorldPoint p) {
  const double dx = p.x - ego.position.x, dy = p.y - ego.position.y;
  const double c = std::cos(ego.heading), s = std::sin(ego.heading);
  const double ahead = dx * c + dy * s;
  const double left = -dx * s + dy * c;
  return {-left, ahead};
}

WorldPoint to_world_frame(const ActorState& ego, EgoPoint p) {
  const double ahead = p.y, left = -p.x;
  const double c = std::cos(ego.heading), s = std::sin(ego.heading);
  return {ego.position.x + ahead * c - left * s, ego.position.y + ahead * s + left * c};
}

namespace {

// angular interval of an actor relative to a reference bearing
std::pair<double, double> angular_interval(const ActorState& ego, const ActorState& actor, double reference) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : corners(actor)) {
    const double a = wrap_angle(std::atan2(p.y - ego.position.y, p.x - ego.position.x) - reference);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return {lo, hi};
}

}  // namespace

Visibility compute_occlusion(const ActorState& ego, const ActorState& target, std::span<const ActorState> others) {
  const double range = std::hypot(target.position.x - ego.position.x, target.position.y - ego.position.y);
  if (range == 0.0) return {};
  const double reference = std::atan2(target.position.y - ego.position.y, target.position.x - ego.position.x);
  const auto [lo, hi] = angular_interval(ego, target, reference);
  const double width = hi - lo;
  if (!(width > 0.0)) return {};

  std::vector<std::pair<double, double>> covers;
  for (const ActorState& other : others) {
    const double d = std::hypot(other.position.x - ego.position.x, other.position.y - ego.position.y);
    if (!(d < range)) continue;
    auto [a, b] = angular_interval(ego, other, reference);
    // an actor straddling the rear axis relative to the target cannot cover it
    if (b - a > std::numbers::pi) continue;
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b > a) covers.emplace_back(a, b);
  }
  std::sort(covers.begin(), covers.end());
  double covered = 0.0, reach = lo;
  for (const auto& [a, b] : covers) {
    const double start = std::max(a, reach);
    if (b > start) {
      covered += b - start;
      reach = b;
    }
  }
  const double fraction = std::clamp(1.0 - covered / width, 0.0, 1.0);
  return {fraction, occlusion_from_fraction(fraction)};
}

}  // namespace pem::sim
