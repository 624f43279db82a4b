#include "pem/learn/stats.hpp"

#include <exception>
#include <map>
#include <optional>

namespace pem::learn {

PartitionStats::PartitionStats(const GridSpec& g)
    : grid(g), conditions(static_cast<std::size_t>(g.n_conditions())) {}

void PartitionStats::merge(const PartitionStats& other) {
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    ConditionStats& mine = conditions[c];
    const ConditionStats& theirs = other.conditions[c];
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) mine.counts[k][l] += theirs.counts[k][l];
    }
    mine.samples.insert(mine.samples.end(), theirs.samples.begin(), theirs.samples.end());
    mine.observed += theirs.observed;
    mine.detected += theirs.detected;
  }
}

std::int64_t PartitionStats::total_transitions() const {
  std::int64_t n = 0;
  for (const auto& c : conditions) n += c.transitions();
  return n;
}

std::int64_t PartitionStats::total_observed() const {
  std::int64_t n = 0;
  for (const auto& c : conditions) n += c.observed;
  return n;
}

PartitionStats accumulate_scene(const Scene& scene, const GridSpec& grid, double gate_m) {
  PartitionStats stats(grid);
  std::map<ObjectId, int> previous;  // detection state in the previous frame
  for (const DatasetFrame& frame : scene.frames) {
    require_unique_ids(frame.ground_truth);
    const FrameMatch match = match_frame(frame.ground_truth, frame.detections, gate_m);

    std::map<ObjectId, std::optional<std::size_t>> matched;
    for (const auto& a : match.assignments) matched[a.gt_id] = a.detection;

    std::map<ObjectId, int> current;
    for (const GroundTruthObject& obj : frame.ground_truth) {
      const auto hit = matched.find(obj.id);
      const int v = hit != matched.end() ? 1 : 0;
      current[obj.id] = v;

      const auto cond = condition_of(obj.position, obj.occlusion, grid);
      if (!cond) continue;
      ConditionStats& cs = stats.conditions[static_cast<std::size_t>(cond->index)];
      ++cs.observed;
      cs.detected += v;

      if (const auto prev = previous.find(obj.id); prev != previous.end()) {
        ++cs.counts[prev->second][v];
      }
      if (v == 1 && obj.position.r > 0.0) {
        const PolarCoord det = frame.detections[*hit->second];
        cs.samples.push_back({det.r / obj.position.r, wrap_angle(det.theta - obj.position.theta)});
      }
    }
    previous = std::move(current);
  }
  return stats;
}

PartitionStats accumulate_stats_serial(const PerceptionDataset& dataset, const GridSpec& grid,
                                       double gate_m) {
  PartitionStats total(grid);
  for (const Scene& scene : dataset.scenes) total.merge(accumulate_scene(scene, grid, gate_m));
  return total;
}

PartitionStats accumulate_stats(const PerceptionDataset& dataset, const GridSpec& grid, double gate_m) {
  const auto n = static_cast<std::ptrdiff_t>(dataset.scenes.size());
  std::vector<PartitionStats> per_scene(dataset.scenes.size(), PartitionStats(grid));
  std::vector<std::exception_ptr> failures(dataset.scenes.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    try {
      per_scene[static_cast<std::size_t>(s)] =
          accumulate_scene(dataset.scenes[static_cast<std::size_t>(s)], grid, gate_m);
    } catch (...) {
      failures[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  // report the first failing scene, as the serial fold would
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  PartitionStats total(grid);
  for (const auto& part : per_scene) total.merge(part);
  return total;
}

}  // namespace pem::learn
