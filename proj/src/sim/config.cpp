#include "pem/sim/config.hpp"

#include <initializer_list>
#include <string>

namespace pem::sim {

using json = nlohmann::ordered_json;

namespace {

void require_known_keys(const json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || k == key;
    if (!known) throw ScenarioError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      field = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ScenarioError(std::string("bad value for '") + key + "'");
    }
  }
}

}  // namespace

json to_json(const ScenarioSpec& spec) {
  const auto& l = spec.lead;
  const auto& p = spec.pedestrian;
  return {{"id", to_string(spec.id)},
          {"duration_s", spec.duration_s},
          {"road_end_x", spec.road_end_x},
          {"ego_initial_speed", spec.ego_initial_speed},
          {"cruise_speed", spec.cruise_speed},
          {"tick_hz", spec.tick_hz},
          {"perception_hz", spec.perception_hz},
          {"lead",
           {{"enabled", l.enabled}, {"start_gap", l.start_gap}, {"speed", l.speed},
            {"stop_x", l.stop_x ? json(*l.stop_x) : json(nullptr)}, {"stop_decel", l.stop_decel}}},
          {"pedestrian",
           {{"enabled", p.enabled}, {"crossing_x", p.crossing_x}, {"start_y", p.start_y}, {"end_y", p.end_y},
            {"speed", p.speed}, {"pause_s", p.pause_s},
            {"trigger", p.trigger == TriggerKind::distance ? "distance" : "eta"},
            {"trigger_value", p.trigger_value}}}};
}

json to_json(const PolicyConfig& cfg) {
  return {{"a_comf", cfg.a_comf},
          {"a_max", cfg.a_max},
          {"corridor_half_width", cfg.corridor_half_width},
          {"headway_s", cfg.headway_s},
          {"standstill_m", cfg.standstill_m},
          {"obstacle_half_length", cfg.obstacle_half_length}};
}

ScenarioSpec scenario_from_json(const json& j) {
  require_known_keys(j, {"id", "duration_s", "road_end_x", "ego_initial_speed", "cruise_speed", "tick_hz",
                         "perception_hz", "lead", "pedestrian"},
                     "scenario");
  const auto name = j.find("id");
  if (name == j.end() || !name->is_string()) throw ScenarioError("scenario needs an 'id' (TC1, TC2 or TC3)");
  const auto id = scenario_from_name(name->get<std::string>());
  if (!id) throw ScenarioError("unknown scenario '" + name->get<std::string>() + "'");

  ScenarioSpec spec = make_scenario(*id);
  read(j, "duration_s", spec.duration_s);
  read(j, "road_end_x", spec.road_end_x);
  read(j, "ego_initial_speed", spec.ego_initial_speed);
  read(j, "cruise_speed", spec.cruise_speed);
  read(j, "tick_hz", spec.tick_hz);
  read(j, "perception_hz", spec.perception_hz);

  if (const auto it = j.find("lead"); it != j.end()) {
    const json& l = *it;
    require_known_keys(l, {"enabled", "start_gap", "speed", "stop_x", "stop_decel"}, "lead");
    read(l, "enabled", spec.lead.enabled);
    read(l, "start_gap", spec.lead.start_gap);
    read(l, "speed", spec.lead.speed);
    read(l, "stop_decel", spec.lead.stop_decel);
    if (const auto s = l.find("stop_x"); s != l.end()) {
      if (s->is_null()) spec.lead.stop_x.reset();
      else if (s->is_number()) spec.lead.stop_x = s->get<double>();
      else throw ScenarioError("bad value for 'stop_x'");
    }
  }
  if (const auto it = j.find("pedestrian"); it != j.end()) {
    const json& p = *it;
    require_known_keys(p, {"enabled", "crossing_x", "start_y", "end_y", "speed", "pause_s", "trigger", "trigger_value"},
                       "pedestrian");
    auto& ped = spec.pedestrian;
    read(p, "enabled", ped.enabled);
    read(p, "crossing_x", ped.crossing_x);
    read(p, "start_y", ped.start_y);
    read(p, "end_y", ped.end_y);
    read(p, "speed", ped.speed);
    read(p, "pause_s", ped.pause_s);
    read(p, "trigger_value", ped.trigger_value);
    if (const auto t = p.find("trigger"); t != p.end()) {
      if (*t == "distance") ped.trigger = TriggerKind::distance;
      else if (*t == "eta") ped.trigger = TriggerKind::eta;
      else throw ScenarioError("trigger must be 'distance' or 'eta'");
    }
  }
  validate(spec);
  return spec;
}

PolicyConfig policy_from_json(const json& j) {
  require_known_keys(j, {"a_comf", "a_max", "corridor_half_width", "headway_s", "standstill_m", "obstacle_half_length"},
                     "policy");
  PolicyConfig cfg;
  read(j, "a_comf", cfg.a_comf);
  read(j, "a_max", cfg.a_max);
  read(j, "corridor_half_width", cfg.corridor_half_width);
  read(j, "headway_s", cfg.headway_s);
  read(j, "standstill_m", cfg.standstill_m);
  read(j, "obstacle_half_length", cfg.obstacle_half_length);
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return cfg;
}

}  // namespace pem::sim
