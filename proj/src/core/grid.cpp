#include "pem/core/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pem {

namespace {

constexpr double kTol = 1e-9;

// round(x) if x is within kTol of an integer >= 1, else 0
int whole_count(double x) {
  if (!std::isfinite(x)) return 0;
  const double rounded = std::round(x);
  if (rounded < 1.0 || std::abs(x - rounded) > kTol * std::max(1.0, rounded)) return 0;
  return static_cast<int>(rounded);
}

}  // namespace

int GridSpec::n_sectors() const { return whole_count(360.0 / sector_width_deg); }

int GridSpec::n_rings() const { return whole_count(max_radius_m / ring_depth_m); }

double GridSpec::sector_width_rad() const { return sector_width_deg * std::numbers::pi / 180.0; }

double GridSpec::sector_center(int sector) const {
  return wrap_angle(static_cast<double>(sector) * sector_width_rad());
}

int GridSpec::sector_of(double theta) const {
  const int n = n_sectors();
  const double w = sector_width_rad();
  double shifted = std::fmod(theta + 0.5 * w, 2.0 * std::numbers::pi);
  if (shifted < 0.0) shifted += 2.0 * std::numbers::pi;
  int sector = static_cast<int>(std::floor(shifted / w));
  // fmod rounding can land exactly on 2*pi
  if (sector >= n) sector -= n;
  return sector;
}

void validate(const GridSpec& grid) {
  if (!(grid.sector_width_deg > 0.0) || grid.n_sectors() == 0) {
    throw GridError("sector_width_deg must divide 360 evenly");
  }
  if (!(grid.ring_depth_m > 0.0)) throw GridError("ring_depth_m must be positive");
  if (!(grid.max_radius_m > 0.0) || grid.n_rings() == 0) {
    throw GridError("max_radius_m must be a whole multiple of ring_depth_m");
  }
}

Condition index_of(const ConditionCell& cell, const GridSpec& grid) {
  const int occ = static_cast<int>(cell.occlusion);
  return {occ * grid.n_cells() + cell.ring * grid.n_sectors() + cell.sector};
}

ConditionCell unindex(Condition cond, const GridSpec& grid) {
  const int cells = grid.n_cells();
  const int occ = cond.index / cells;
  const int rem = cond.index % cells;
  return {static_cast<OcclusionLevel>(occ), rem / grid.n_sectors(), rem % grid.n_sectors()};
}

std::optional<Condition> condition_of(PolarCoord position, OcclusionLevel occlusion,
                                      const GridSpec& grid) {
  if (!(position.r < grid.max_radius_m)) return std::nullopt;
  int ring = static_cast<int>(std::floor(position.r / grid.ring_depth_m));
  // r just below max_radius can round up to n_rings
  if (ring >= grid.n_rings()) ring = grid.n_rings() - 1;
  return index_of({occlusion, ring, grid.sector_of(position.theta)}, grid);
}

std::string describe(const GridSpec& grid) {
  std::ostringstream out;
  out << grid.n_rings() << " rings x " << grid.n_sectors() << " sectors (" << grid.sector_width_deg
      << " deg, " << grid.ring_depth_m << " m, max " << grid.max_radius_m << " m)";
  return out.str();
}

}  // namespace pem
