#pragma once

#include <cstdint>
#include <vector>

#include "pem/core/model.hpp"
#include "pem/learn/dataset.hpp"

namespace pem::learn {

enum class Motion { static_objects, constant_velocity };

/// Generator of perception datasets from a known model, used to check that
/// learning recovers the model that produced the data.
struct SyntheticDatasetConfig {
  PemModel true_model;
  int n_scenes = 1;
  int frames_per_scene = 1;
  int objects_per_scene = 1;
  Motion motion = Motion::static_objects;
  std::uint64_t seed = 0;
  double frame_rate_hz = 2.0;
  /// Occlusion levels objects are drawn from (uniformly); empty means all.
  std::vector<OcclusionLevel> occlusion_levels;
  /// Initial placements keep at least this center distance when possible.
  double min_separation_m = 6.0;
  /// Constant-velocity objects move at a uniform speed in [0, max_speed].
  double max_speed_mps = 2.0;
};

void validate(const SyntheticDatasetConfig& config);

/// Objects are placed with uniformly chosen ring and sector (uniform radius
/// and bearing inside the cell), each scene uses its own generator derived
/// from (seed, scene index), and every frame is passed through the true model.
/// Detections are listed in ground-truth order.
PerceptionDataset synthesize_dataset(const SyntheticDatasetConfig& config);

}  // namespace pem::learn
