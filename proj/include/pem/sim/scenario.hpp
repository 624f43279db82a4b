#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pem/sim/geometry.hpp"

namespace pem::sim {

enum class ScenarioId { tc1, tc2, tc3 };

std::string_view to_string(ScenarioId id);
std::optional<ScenarioId> scenario_from_name(std::string_view name);

/// A vehicle driving ahead of the ego in its lane, optionally braking to a
/// stop with its front bumper at `stop_x`.
struct LeadScript {
  bool enabled = false;
  double start_gap = 25.0;  ///< center distance ahead of the ego at t = 0
  double speed = 7.0;
  std::optional<double> stop_x;
  double stop_decel = 2.0;
};

enum class TriggerKind {
  distance,  ///< start when the ego center is this close to the crossing line
  eta,       ///< start when the ego's predicted time to reach the pedestrian drops to this value
};

/// A pedestrian crossing the road at `crossing_x`, from `start_y` to
/// `end_y`, pausing `pause_s` seconds on the lane center line.
struct PedestrianScript {
  bool enabled = false;
  double crossing_x = 400.0;
  double start_y = -4.5;
  double end_y = 4.5;
  double speed = 1.2;
  double pause_s = 4.0;
  TriggerKind trigger = TriggerKind::distance;
  double trigger_value = 62.5;
};

struct ScenarioSpec {
  ScenarioId id = ScenarioId::tc1;
  double duration_s = 60.0;
  double road_end_x = 460.0;  ///< the run ends once the ego center passes this
  double ego_initial_speed = 10.0;
  double cruise_speed = 10.0;
  double tick_hz = 10.0;
  double perception_hz = 2.0;
  LeadScript lead;
  PedestrianScript pedestrian;

  int ticks_per_perception() const;
  int max_ticks() const;
};

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const ScenarioSpec& spec);

/// TC1: a pedestrian steps into the lane about 400 m into the drive.
/// TC2: following a 7 m/s lead vehicle that stops at a traffic light at 500 m.
/// TC3: TC2 with a pedestrian crossing between lead and ego, timed from the
/// ego's predicted arrival.
ScenarioSpec make_scenario(ScenarioId id);

inline constexpr ObjectId kLeadId = 1;
inline constexpr ObjectId kPedestrianId = 2;

/// Scripted actors of one run and their per-tick update.
class ScriptedActors {
 public:
  explicit ScriptedActors(const ScenarioSpec& spec);

  struct Actor {
    ObjectId id;
    ActorState state;
  };
  const std::vector<Actor>& actors() const { return actors_; }

  /// Moves every actor by its current speed for `dt`, then updates speeds
  /// and phases given the ego state after its own move.
  void advance(double dt, const ActorState& ego);

  bool pedestrian_started() const { return ped_phase_ != PedPhase::waiting; }

 private:
  enum class PedPhase { waiting, entering, paused, leaving, done };

  ScenarioSpec spec_;
  std::vector<Actor> actors_;
  PedPhase ped_phase_ = PedPhase::waiting;
  double pause_left_ = 0.0;
  bool lead_braking_ = false;
};

ActorState initial_ego(const ScenarioSpec& spec);

}  // namespace pem::sim
