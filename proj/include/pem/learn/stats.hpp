#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pem/core/grid.hpp"
#include "pem/core/injector.hpp"
#include "pem/learn/dataset.hpp"
#include "pem/learn/matching.hpp"

namespace pem::learn {

struct ConditionStats {
  /// counts[k][l]: observed transitions from v=k to v=l
  std::array<std::array<std::int64_t, 2>, 2> counts{};
  /// (perceived/true range, perceived-true bearing) from matched frames
  std::vector<ErrorSample> samples;
  std::int64_t observed = 0;  ///< in-range object frames
  std::int64_t detected = 0;  ///< of which matched

  std::int64_t transitions() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }
};

/// Sufficient statistics per condition; merging is associative, and merging
/// in scene order reproduces the serial result exactly.
struct PartitionStats {
  GridSpec grid;
  std::vector<ConditionStats> conditions;

  explicit PartitionStats(const GridSpec& g = {});

  void merge(const PartitionStats& other);
  std::int64_t total_transitions() const;
  std::int64_t total_observed() const;
};

/// Statistics of one scene. A transition is counted when an object is present
/// in two consecutive frames, under the condition of its later frame; objects
/// at or beyond the grid radius are skipped. Throws DuplicateIdError.
PartitionStats accumulate_scene(const Scene& scene, const GridSpec& grid, double gate_m = kDefaultGateM);

/// Serial reference: scenes folded in order.
PartitionStats accumulate_stats_serial(const PerceptionDataset& dataset, const GridSpec& grid,
                                       double gate_m = kDefaultGateM);

/// OpenMP over scenes; per-scene results are merged in scene order, so the
/// output is identical to accumulate_stats_serial.
PartitionStats accumulate_stats(const PerceptionDataset& dataset, const GridSpec& grid,
                                double gate_m = kDefaultGateM);

}  // namespace pem::learn
