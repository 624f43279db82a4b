#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pem/core/types.hpp"

namespace pem::learn {

inline constexpr double kDefaultGateM = 10.0;

struct Assignment {
  ObjectId gt_id = 0;
  std::size_t detection = 0;
  double distance = 0.0;  ///< Euclidean center distance [m]

  bool operator==(const Assignment&) const = default;
};

/// Matching of one frame. Assignments are sorted by ground-truth id.
struct FrameMatch {
  std::vector<Assignment> assignments;
  std::vector<ObjectId> unmatched_gt;
  std::vector<std::size_t> unmatched_detections;

  /// Sum of assignment distances, accumulated in ground-truth id order.
  double total_cost() const;
};

double center_distance(PolarCoord a, PolarCoord b);

/// Gated optimal one-to-one assignment.
///
/// Among all matchings whose pairs are within `gate_m`, picks one with the
/// most pairs and, among those, the least total Euclidean distance. Solved
/// with the Hungarian method on a padded square matrix; rows follow ascending
/// ground-truth id and columns detection index, so ties resolve toward the
/// lowest id and index.
FrameMatch match_frame(std::span<const GroundTruthObject> gt, std::span<const PolarCoord> detections,
                       double gate_m = kDefaultGateM);

/// Minimum-cost perfect assignment for a square row-major cost matrix.
/// Returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

}  // namespace pem::learn
