#include "pem/core/injector.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace pem {

int step_detection(const PemModel& model, Condition cond, int prev_v, Rng& rng) {
  const TransitionMatrix& tm = model.at(cond).transition;
  const double p_detect = prev_v == 1 ? tm.a11 : tm.a01;
  return rng.bernoulli(p_detect) ? 1 : 0;
}

ErrorSample sample_error(const PemModel& model, Condition cond, Rng& rng) {
  const ErrorDistribution& e = model.at(cond).error;
  const auto [z1, z2] = rng.normal_pair();
  // Cholesky factor of the correlation matrix
  const double z_theta = e.rho * z1 + std::sqrt(1.0 - e.rho * e.rho) * z2;
  return {e.mu_r + e.sigma_r * z1, e.mu_theta + e.sigma_theta * z_theta};
}

void require_unique_ids(std::span<const GroundTruthObject> world) {
  std::unordered_set<ObjectId> seen;
  seen.reserve(world.size());
  for (const auto& obj : world) {
    if (!seen.insert(obj.id).second) throw DuplicateIdError(obj.id);
  }
}

PerceivedFrame apply(const PemModel& model, std::span<const GroundTruthObject> world,
                     const TrackState& tracks, Rng& rng) {
  require_unique_ids(world);

  PerceivedFrame out;
  for (const auto& obj : world) {
    const auto cond = condition_of(obj.position, obj.occlusion, model.grid);
    if (!cond) {
      out.tracks[obj.id] = 0;
      continue;
    }
    const auto prev = tracks.find(obj.id);
    const int prev_v = prev == tracks.end() ? 0 : prev->second;
    const int v = step_detection(model, *cond, prev_v, rng);
    out.tracks[obj.id] = v;
    if (v == 0) continue;

    const ErrorSample eps = sample_error(model, *cond, rng);
    PolarCoord perceived;
    perceived.r = std::max(obj.position.r * eps.eps_r, kMinPerceivedRange);
    perceived.theta = wrap_angle(obj.position.theta + eps.eps_theta);
    out.objects.push_back({obj.id, perceived});
  }
  return out;
}

std::vector<CartesianDetection> perceive(const PemModel& model, std::span<const CartesianObject> world,
                                         TrackState& tracks, Rng& rng) {
  std::vector<GroundTruthObject> polar;
  polar.reserve(world.size());
  for (const auto& o : world) polar.push_back({o.id, to_polar(o.position), o.occlusion});
  PerceivedFrame frame = apply(model, polar, tracks, rng);
  tracks = std::move(frame.tracks);
  std::vector<CartesianDetection> out;
  out.reserve(frame.objects.size());
  for (const auto& p : frame.objects) out.push_back({p.source_id, to_cartesian(p.position)});
  return out;
}

}  // namespace pem
