#pragma once

// Object representations in the ego-relative frame.
//
// The ego sits at the origin facing +y. Bearings are measured counterclockwise
// from the ego heading and live in (-pi, pi]; a point to the left of the ego
// has a positive bearing.

#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>

namespace pem {

using ObjectId = std::int64_t;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

struct PolarCoord {
  double r = 0.0;      ///< radial distance [m], >= 0
  double theta = 0.0;  ///< bearing [rad], (-pi, pi]

  bool operator==(const PolarCoord&) const = default;
};

/// Ego-relative Cartesian point; +y is straight ahead, +x to the right.
struct EgoPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const EgoPoint&) const = default;
};

PolarCoord to_polar(EgoPoint p);
EgoPoint to_cartesian(PolarCoord p);

bool is_valid(PolarCoord p);

/// Visibility bins of the annotated visible fraction:
/// vis0 [0, 0.4), vis1 [0.4, 0.6), vis2 [0.6, 0.8), vis3 [0.8, 1.0].
enum class OcclusionLevel : std::uint8_t { vis0 = 0, vis1 = 1, vis2 = 2, vis3 = 3 };

inline constexpr int kOcclusionLevels = 4;

OcclusionLevel occlusion_from_fraction(double visible_fraction);
std::optional<OcclusionLevel> occlusion_from_index(int index);
std::string_view to_string(OcclusionLevel level);

struct GroundTruthObject {
  ObjectId id = 0;
  PolarCoord position;
  OcclusionLevel occlusion = OcclusionLevel::vis3;

  bool operator==(const GroundTruthObject&) const = default;
};

struct PerceivedObject {
  ObjectId source_id = 0;
  PolarCoord position;

  bool operator==(const PerceivedObject&) const = default;
};

}  // namespace pem
