#pragma once

#include <array>
#include <span>
#include <string_view>

#include "pem/core/types.hpp"

namespace pem::sim {

/// World frame: x along the road, y to the left, headings CCW from +x.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const WorldPoint&) const = default;
};

enum class ActorKind { ego, vehicle, pedestrian };

std::string_view to_string(ActorKind kind);

struct Footprint {
  double length = 4.5;
  double width = 1.8;

  bool operator==(const Footprint&) const = default;
};

inline constexpr Footprint kCarFootprint{4.5, 1.8};
inline constexpr Footprint kPedestrianFootprint{0.5, 0.5};

struct ActorState {
  WorldPoint position;
  double heading = 0.0;
  double speed = 0.0;
  Footprint footprint;
  ActorKind kind = ActorKind::vehicle;

  bool operator==(const ActorState&) const = default;
};

/// Corners of the footprint rectangle, counterclockwise.
std::array<WorldPoint, 4> corners(const ActorState& actor);

/// Gap between two footprints; 0 when they touch or overlap.
double footprint_distance(const ActorState& a, const ActorState& b);

/// World point expressed in the ego frame (x right, y ahead).
EgoPoint to_ego_frame(const ActorState& ego, WorldPoint p);
WorldPoint to_world_frame(const ActorState& ego, EgoPoint p);

struct Visibility {
  double visible_fraction = 1.0;
  OcclusionLevel level = OcclusionLevel::vis3;
};

/// Share of the target's angular extent, seen from the ego center, that no
/// strictly nearer actor (by center distance) covers.
Visibility compute_occlusion(const ActorState& ego, const ActorState& target, std::span<const ActorState> others);

}  // namespace pem::sim
