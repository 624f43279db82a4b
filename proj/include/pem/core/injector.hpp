#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "pem/core/model.hpp"
#include "pem/core/random.hpp"

namespace pem {

/// Per-object detection state carried between frames (id -> v in {0, 1}).
/// After each apply() it holds exactly the ids of the last frame.
using TrackState = std::map<ObjectId, int>;

/// Smallest perceived range; radial-ratio draws at or below zero clamp here.
inline constexpr double kMinPerceivedRange = 0.01;

class DuplicateIdError : public std::invalid_argument {
 public:
  explicit DuplicateIdError(ObjectId id)
      : std::invalid_argument("duplicate object id " + std::to_string(id)), id_(id) {}
  ObjectId id() const { return id_; }

 private:
  ObjectId id_;
};

/// One step of the condition's detection chain. Always consumes one uniform.
int step_detection(const PemModel& model, Condition cond, int prev_v, Rng& rng);

struct ErrorSample {
  double eps_r = 1.0;      ///< perceived / true range
  double eps_theta = 0.0;  ///< perceived - true bearing [rad]
};

/// Draw from N(mu, Sigma) with Sigma = diag(s) [[1, rho], [rho, 1]] diag(s).
ErrorSample sample_error(const PemModel& model, Condition cond, Rng& rng);

struct PerceivedFrame {
  std::vector<PerceivedObject> objects;
  TrackState tracks;
};

/// Runs the model over one ground-truth frame.
///
/// Objects are processed in the given order. In-range objects step their
/// detection chain (ids not in `tracks` start undetected) and, when detected,
/// draw one error sample. Objects at or beyond the grid radius are never
/// detected and draw nothing. Throws DuplicateIdError before any draw.
PerceivedFrame apply(const PemModel& model, std::span<const GroundTruthObject> world,
                     const TrackState& tracks, Rng& rng);

void require_unique_ids(std::span<const GroundTruthObject> world);

/// Ground-truth object given in ego-relative Cartesian coordinates.
struct CartesianObject {
  ObjectId id = 0;
  EgoPoint position;
  OcclusionLevel occlusion = OcclusionLevel::vis0;

  bool operator==(const CartesianObject&) const = default;
};

struct CartesianDetection {
  ObjectId source_id = 0;
  EgoPoint position;

  bool operator==(const CartesianDetection&) const = default;
};

/// apply() for Cartesian input and output; `tracks` is updated in place.
/// Shared by the server and by in-process perception so both produce the
/// same numbers.
std::vector<CartesianDetection> perceive(const PemModel& model, std::span<const CartesianObject> world,
                                         TrackState& tracks, Rng& rng);

}  // namespace pem
