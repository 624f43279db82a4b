#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "pem/core/types.hpp"

namespace pem {

/// Polar partition of the ego surroundings.
///
/// Sectors are centered on the ego heading: sector 0 spans
/// [-w/2, w/2) around theta = 0 and indices grow counterclockwise. Rings are
/// [k * ring_depth, (k + 1) * ring_depth); anything at or beyond max_radius is
/// outside the grid.
struct GridSpec {
  double sector_width_deg = 30.0;
  double ring_depth_m = 10.0;
  double max_radius_m = 100.0;

  int n_sectors() const;
  int n_rings() const;
  int n_cells() const { return n_sectors() * n_rings(); }
  int n_conditions() const { return kOcclusionLevels * n_cells(); }
  double sector_width_rad() const;

  /// Bearing at the center of a sector, wrapped to (-pi, pi].
  double sector_center(int sector) const;
  int sector_of(double theta) const;

  bool operator==(const GridSpec&) const = default;
};

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws GridError when the sector width does not tile 360 degrees or the
/// radius is not a whole number of rings.
void validate(const GridSpec& grid);

struct ConditionCell {
  OcclusionLevel occlusion = OcclusionLevel::vis3;
  int ring = 0;
  int sector = 0;

  bool operator==(const ConditionCell&) const = default;
};

/// Dense index into a model's condition table, occlusion-major:
/// index = occ * (n_rings * n_sectors) + ring * n_sectors + sector.
struct Condition {
  int index = 0;

  bool operator==(const Condition&) const = default;
  auto operator<=>(const Condition&) const = default;
};

Condition index_of(const ConditionCell& cell, const GridSpec& grid);
ConditionCell unindex(Condition cond, const GridSpec& grid);

/// Returns nullopt (out of range) when position.r >= max_radius.
std::optional<Condition> condition_of(PolarCoord position, OcclusionLevel occlusion,
                                      const GridSpec& grid);

std::string describe(const GridSpec& grid);

}  // namespace pem
