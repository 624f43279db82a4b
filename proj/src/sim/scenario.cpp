#include "pem/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pem::sim {

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::tc1: return "TC1";
    case ScenarioId::tc2: return "TC2";
    case ScenarioId::tc3: return "TC3";
  }
  return "?";
}

std::optional<ScenarioId> scenario_from_name(std::string_view name) {
  for (ScenarioId id : {ScenarioId::tc1, ScenarioId::tc2, ScenarioId::tc3}) {
    const std::string_view canonical = to_string(id);
    if (name.size() == canonical.size() &&
        std::equal(name.begin(), name.end(), canonical.begin(),
                   [](char a, char b) { return std::toupper(static_cast<unsigned char>(a)) == b; })) {
      return id;
    }
  }
  return std::nullopt;
}

int ScenarioSpec::ticks_per_perception() const {
  return static_cast<int>(std::lround(tick_hz / perception_hz));
}

int ScenarioSpec::max_ticks() const { return static_cast<int>(std::lround(duration_s * tick_hz)); }

void validate(const ScenarioSpec& spec) {
  if (!(spec.tick_hz > 0.0 && spec.perception_hz > 0.0)) throw ScenarioError("rates must be positive");
  const double ratio = spec.tick_hz / spec.perception_hz;
  if (ratio < 1.0 - 1e-9 || std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ScenarioError("perception rate must divide the tick rate");
  }
  if (!(spec.duration_s > 0.0)) throw ScenarioError("duration must be positive");
  if (!(spec.ego_initial_speed >= 0.0 && spec.cruise_speed >= 0.0)) throw ScenarioError("speeds must be non-negative");
  if (spec.lead.enabled) {
    if (!(spec.lead.speed >= 0.0 && spec.lead.start_gap > kCarFootprint.length)) {
      throw ScenarioError("lead vehicle needs non-negative speed and a start gap beyond one car length");
    }
    if (spec.lead.stop_x && !(spec.lead.stop_decel > 0.0)) throw ScenarioError("lead stop deceleration must be positive");
  }
  if (spec.pedestrian.enabled) {
    const auto& p = spec.pedestrian;
    if (!(p.speed > 0.0 && p.pause_s >= 0.0)) throw ScenarioError("pedestrian speed must be positive, pause non-negative");
    if (!((p.start_y < 0.0 && p.end_y > 0.0) || (p.start_y > 0.0 && p.end_y < 0.0))) {
      throw ScenarioError("pedestrian must cross the lane center line");
    }
    if (!(p.trigger_value >= 0.0)) throw ScenarioError("pedestrian trigger must be non-negative");
  }
}

ScenarioSpec make_scenario(ScenarioId id) {
  ScenarioSpec spec;
  spec.id = id;
  switch (id) {
    case ScenarioId::tc1:
      spec.duration_s = 60.0;
      spec.road_end_x = 460.0;
      spec.ego_initial_speed = 10.0;
      spec.cruise_speed = 10.0;
      spec.pedestrian = {true, 400.0, -4.5, 4.5, 1.2, 4.0, TriggerKind::distance, 62.5};
      break;
    case ScenarioId::tc2:
    case ScenarioId::tc3:
      spec.duration_s = 90.0;
      spec.road_end_x = 600.0;
      spec.ego_initial_speed = 7.0;
      spec.cruise_speed = 10.0;
      spec.lead = {true, 25.0, 7.0, 500.0, 2.0};
      if (id == ScenarioId::tc3) spec.pedestrian = {true, 250.0, -4.0, 4.0, 1.5, 3.0, TriggerKind::eta, 3.2};
      break;
  }
  return spec;
}

ActorState initial_ego(const ScenarioSpec& spec) {
  return {{0.0, 0.0}, 0.0, spec.ego_initial_speed, kCarFootprint, ActorKind::ego};
}

ScriptedActors::ScriptedActors(const ScenarioSpec& spec) : spec_(spec) {
  if (spec.lead.enabled) {
    actors_.push_back({kLeadId, {{spec.lead.start_gap, 0.0}, 0.0, spec.lead.speed, kCarFootprint, ActorKind::vehicle}});
  }
  if (spec.pedestrian.enabled) {
    const auto& p = spec.pedestrian;
    const double heading = p.end_y > p.start_y ? std::numbers::pi / 2.0 : -std::numbers::pi / 2.0;
    actors_.push_back({kPedestrianId, {{p.crossing_x, p.start_y}, heading, 0.0, kPedestrianFootprint, ActorKind::pedestrian}});
  }
}

void ScriptedActors::advance(double dt, const ActorState& ego) {
  for (auto& a : actors_) {
    a.state.position.x += a.state.speed * std::cos(a.state.heading) * dt;
    a.state.position.y += a.state.speed * std::sin(a.state.heading) * dt;
  }

  for (auto& a : actors_) {
    ActorState& s = a.state;
    if (a.id == kLeadId) {
      const auto& lead = spec_.lead;
      if (lead.stop_x && !lead_braking_) {
        const double front = s.position.x + s.footprint.length / 2.0;
        lead_braking_ = front >= *lead.stop_x - s.speed * s.speed / (2.0 * lead.stop_decel);
      }
      if (lead_braking_) s.speed = std::max(s.speed - lead.stop_decel * dt, 0.0);
      continue;
    }

    const auto& ped = spec_.pedestrian;
    const double dir = ped.end_y > ped.start_y ? 1.0 : -1.0;
    switch (ped_phase_) {
      case PedPhase::waiting: {
        bool go = false;
        if (ped.trigger == TriggerKind::distance) {
          go = ped.crossing_x - ego.position.x <= ped.trigger_value;
        } else {
          const double gap = ped.crossing_x - s.footprint.length / 2.0 - (ego.position.x + ego.footprint.length / 2.0);
          go = gap > 0.0 && gap <= ped.trigger_value * std::max(ego.speed, 1e-9);
        }
        if (go) {
          s.speed = ped.speed;
          ped_phase_ = PedPhase::entering;
        }
        break;
      }
      case PedPhase::entering:
        if (dir * s.position.y >= 0.0) {
          if (ped.pause_s > 0.0) {
            s.speed = 0.0;
            pause_left_ = ped.pause_s;
            ped_phase_ = PedPhase::paused;
          } else {
            ped_phase_ = PedPhase::leaving;
          }
        }
        break;
      case PedPhase::paused:
        pause_left_ -= dt;
        if (pause_left_ <= 1e-9) {
          s.speed = ped.speed;
          ped_phase_ = PedPhase::leaving;
        }
        break;
      case PedPhase::leaving:
        if (dir * (s.position.y - ped.end_y) >= 0.0) {
          s.speed = 0.0;
          ped_phase_ = PedPhase::done;
        }
        break;
      case PedPhase::done: break;
    }
  }
}

}  // namespace pem::sim
