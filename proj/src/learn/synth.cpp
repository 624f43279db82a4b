#include "pem/learn/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pem/core/injector.hpp"
#include "pem/core/random.hpp"

namespace pem::learn {

void validate(const SyntheticDatasetConfig& config) {
  validate(config.true_model);
  if (config.n_scenes < 1 || config.frames_per_scene < 1 || config.objects_per_scene < 1) {
    throw std::invalid_argument("scene, frame and object counts must be at least 1");
  }
  if (!(config.frame_rate_hz > 0.0)) throw std::invalid_argument("frame rate must be positive");
}

namespace {

struct MovingObject {
  ObjectId id;
  EgoPoint position;
  EgoPoint velocity;
  OcclusionLevel occlusion;
};

EgoPoint random_point(const GridSpec& grid, Rng& rng) {
  const int ring = static_cast<int>(rng.uniform() * grid.n_rings());
  const int sector = static_cast<int>(rng.uniform() * grid.n_sectors());
  // stay clear of the origin, where the radial ratio is ill-conditioned
  const double inner = std::max(ring * grid.ring_depth_m, 0.5);
  const double r = inner + rng.uniform() * ((ring + 1) * grid.ring_depth_m - inner);
  const double theta = grid.sector_center(sector) + (rng.uniform() - 0.5) * grid.sector_width_rad();
  return to_cartesian({r, wrap_angle(theta)});
}

std::vector<MovingObject> place_objects(const SyntheticDatasetConfig& config, Rng& rng) {
  const GridSpec& grid = config.true_model.grid;
  std::vector<OcclusionLevel> levels = config.occlusion_levels;
  if (levels.empty()) levels = {OcclusionLevel::vis0, OcclusionLevel::vis1, OcclusionLevel::vis2, OcclusionLevel::vis3};

  std::vector<MovingObject> objects;
  for (int i = 0; i < config.objects_per_scene; ++i) {
    EgoPoint p = random_point(grid, rng);
    for (int attempt = 0; attempt < 200; ++attempt) {
      bool clear = true;
      for (const auto& o : objects) {
        if (std::hypot(o.position.x - p.x, o.position.y - p.y) < config.min_separation_m) {
          clear = false;
          break;
        }
      }
      if (clear) break;
      p = random_point(grid, rng);
    }
    EgoPoint v{0.0, 0.0};
    if (config.motion == Motion::constant_velocity) {
      const double speed = rng.uniform() * config.max_speed_mps;
      const double heading = 2.0 * std::numbers::pi * rng.uniform();
      v = {speed * std::cos(heading), speed * std::sin(heading)};
    }
    const auto level = levels[static_cast<std::size_t>(rng.uniform() * static_cast<double>(levels.size()))];
    objects.push_back({static_cast<ObjectId>(i + 1), p, v, level});
  }
  return objects;
}

}  // namespace

PerceptionDataset synthesize_dataset(const SyntheticDatasetConfig& config) {
  validate(config);
  PerceptionDataset dataset;
  dataset.frame_rate_hz = config.frame_rate_hz;
  const double dt = 1.0 / config.frame_rate_hz;

  for (int s = 0; s < config.n_scenes; ++s) {
    Rng rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(s))));
    std::vector<MovingObject> objects = place_objects(config, rng);
    Scene scene{std::to_string(s), {}};
    TrackState tracks;
    for (int f = 0; f < config.frames_per_scene; ++f) {
      DatasetFrame frame;
      frame.t = f * dt;
      for (auto& o : objects) {
        frame.ground_truth.push_back({o.id, to_polar(o.position), o.occlusion});
      }
      PerceivedFrame perceived = apply(config.true_model, frame.ground_truth, tracks, rng);
      for (const auto& p : perceived.objects) frame.detections.push_back(p.position);
      tracks = std::move(perceived.tracks);
      scene.frames.push_back(std::move(frame));
      for (auto& o : objects) {
        o.position.x += o.velocity.x * dt;
        o.position.y += o.velocity.y * dt;
      }
    }
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

}  // namespace pem::learn
