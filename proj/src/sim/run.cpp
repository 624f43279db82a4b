#include "pem/sim/run.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "pem/server/client.hpp"

namespace pem::sim {

std::string_view to_string(EndReason reason) {
  switch (reason) {
    case EndReason::duration: return "duration";
    case EndReason::road_end: return "road_end";
    case EndReason::collision: return "collision";
    case EndReason::aborted: return "aborted";
  }
  return "?";
}

std::optional<EndReason> end_reason_from_name(std::string_view name) {
  for (EndReason r : {EndReason::duration, EndReason::road_end, EndReason::collision, EndReason::aborted}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

namespace {

struct HeldPoint {
  ObjectId source_id;
  WorldPoint position;
};

class Perceiver {
 public:
  Perceiver(const PerceptionSource& source, const ScenarioSpec& spec, std::uint64_t seed)
      : source_(source), rng_(session_seed(seed, 0)) {
    if (const auto* remote = std::get_if<RemoteSource>(&source_)) {
      client_.emplace(remote->host, remote->port);
      client_->init(remote->model, seed, spec.perception_hz);
    }
  }

  std::vector<CartesianDetection> operator()(double t, std::span<const CartesianObject> world) {
    if (std::holds_alternative<GroundTruthSource>(source_)) {
      std::vector<CartesianDetection> out;
      out.reserve(world.size());
      for (const auto& o : world) out.push_back({o.id, o.position});
      return out;
    }
    if (const auto* local = std::get_if<ModelSource>(&source_)) return perceive(*local->model, world, tracks_, rng_);
    return client_->frame(t, world);
  }

 private:
  const PerceptionSource& source_;
  Rng rng_;
  TrackState tracks_;
  std::optional<server::Client> client_;
};

double center_range(const ActorState& a, const ActorState& b) {
  return std::hypot(a.position.x - b.position.x, a.position.y - b.position.y);
}

}  // namespace

RunLog run_once(const ScenarioSpec& spec, const PolicyConfig& policy, const PerceptionSource& source,
                std::uint64_t seed) {
  validate(spec);
  validate(policy);
  if (const auto* local = std::get_if<ModelSource>(&source); local && !local->model) {
    throw std::invalid_argument("model perception source without a model");
  }

  RunLog log;
  log.scenario = spec.id;
  log.seed = seed;
  log.tick_hz = spec.tick_hz;
  log.perception_hz = spec.perception_hz;
  log.outcome.min_distance = std::numeric_limits<double>::infinity();

  const double dt = 1.0 / spec.tick_hz;
  const int every = spec.ticks_per_perception();
  const int n_ticks = spec.max_ticks();

  std::optional<Perceiver> perceiver;
  try {
    perceiver.emplace(source, spec, seed);
  } catch (const std::exception& e) {
    log.outcome.end = EndReason::aborted;
    log.outcome.abort_reason = e.what();
    return log;
  }

  ActorState ego = initial_ego(spec);
  ScriptedActors actors(spec);
  std::vector<HeldPoint> held;
  log.ticks.reserve(static_cast<std::size_t>(n_ticks));

  for (int k = 0; k < n_ticks; ++k) {
    TickRecord rec;
    rec.tick = k;
    rec.t = k * dt;
    rec.ego = ego;
    rec.perception_tick = k % every == 0;

    const auto& scripted = actors.actors();
    std::vector<ActorState> states;
    states.reserve(scripted.size());
    for (const auto& a : scripted) states.push_back(a.state);

    bool collision = false;
    for (std::size_t i = 0; i < scripted.size(); ++i) {
      ObstacleRecord ob;
      ob.id = scripted[i].id;
      ob.state = scripted[i].state;
      ob.distance = footprint_distance(ego, ob.state);
      ob.eligible = center_range(ego, ob.state) <= kMetricRange;
      std::vector<ActorState> others;
      for (std::size_t j = 0; j < states.size(); ++j) {
        if (j != i) others.push_back(states[j]);
      }
      const Visibility vis = compute_occlusion(ego, ob.state, others);
      ob.visible_fraction = vis.visible_fraction;
      ob.occlusion = vis.level;
      if (ob.distance < log.outcome.min_distance) {
        log.outcome.min_distance = ob.distance;
        log.outcome.critical_obstacle = ob.id;
      }
      collision = collision || ob.distance == 0.0;
      rec.obstacles.push_back(std::move(ob));
    }

    if (rec.perception_tick) {
      std::vector<CartesianObject> world;
      world.reserve(rec.obstacles.size());
      for (const auto& ob : rec.obstacles) world.push_back({ob.id, to_ego_frame(ego, ob.state.position), ob.occlusion});
      try {
        rec.perceived = (*perceiver)(rec.t, world);
      } catch (const std::exception& e) {
        log.outcome.end = EndReason::aborted;
        log.outcome.abort_reason = e.what();
        return log;
      }
      held.clear();
      for (const auto& d : rec.perceived) held.push_back({d.source_id, to_world_frame(ego, d.position)});
      for (auto& ob : rec.obstacles) {
        ob.detected = std::any_of(rec.perceived.begin(), rec.perceived.end(),
                                  [&](const CartesianDetection& d) { return d.source_id == ob.id; });
      }
    }

    std::vector<CartesianDetection> current;
    current.reserve(held.size());
    for (const auto& h : held) current.push_back({h.source_id, to_ego_frame(ego, h.position)});
    rec.acceleration = driving_policy(current, ego, spec.cruise_speed, dt, policy);
    const double accel = rec.acceleration;
    log.ticks.push_back(std::move(rec));

    if (collision) {
      log.outcome.end = EndReason::collision;
      return log;
    }
    if (ego.position.x > spec.road_end_x) {
      log.outcome.end = EndReason::road_end;
      return log;
    }

    ego.position.x += ego.speed * std::cos(ego.heading) * dt;
    ego.position.y += ego.speed * std::sin(ego.heading) * dt;
    ego.speed = std::max(ego.speed + accel * dt, 0.0);
    actors.advance(dt, ego);
  }
  log.outcome.end = EndReason::duration;
  return log;
}

double min_distance(const RunLog& log) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tick : log.ticks) {
    for (const auto& ob : tick.obstacles) best = std::min(best, ob.distance);
  }
  return best;
}

std::optional<PerceptionMetrics> metrics_from_pattern(std::span<const std::optional<bool>> pattern,
                                                      double perception_period_s) {
  int eligible = 0, detected = 0, run = 0, longest = 0;
  for (const auto& p : pattern) {
    if (!p) {
      run = 0;
      continue;
    }
    ++eligible;
    if (*p) {
      ++detected;
      run = 0;
    } else {
      longest = std::max(longest, ++run);
    }
  }
  if (eligible == 0) return std::nullopt;
  return PerceptionMetrics{static_cast<double>(detected) / eligible, longest * perception_period_s, eligible};
}

std::optional<PerceptionMetrics> perception_metrics(const RunLog& log, ObjectId obstacle) {
  std::vector<std::optional<bool>> pattern;
  for (const auto& tick : log.ticks) {
    if (!tick.perception_tick) continue;
    for (const auto& ob : tick.obstacles) {
      if (ob.id != obstacle) continue;
      pattern.push_back(ob.eligible ? ob.detected : std::nullopt);
    }
  }
  return metrics_from_pattern(pattern, 1.0 / log.perception_hz);
}

std::optional<PerceptionMetrics> perception_metrics(const RunLog& log) {
  if (!log.outcome.critical_obstacle) return std::nullopt;
  return perception_metrics(log, *log.outcome.critical_obstacle);
}

namespace {

using json = nlohmann::ordered_json;

json to_json(const ActorState& s) {
  return {{"x", s.position.x}, {"y", s.position.y}, {"heading", s.heading}, {"speed", s.speed},
          {"length", s.footprint.length}, {"width", s.footprint.width}, {"kind", to_string(s.kind)}};
}

ActorState actor_from_json(const json& j) {
  ActorState s;
  s.position = {j.at("x").get<double>(), j.at("y").get<double>()};
  s.heading = j.at("heading").get<double>();
  s.speed = j.at("speed").get<double>();
  s.footprint = {j.at("length").get<double>(), j.at("width").get<double>()};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "ego") s.kind = ActorKind::ego;
  else if (kind == "vehicle") s.kind = ActorKind::vehicle;
  else if (kind == "pedestrian") s.kind = ActorKind::pedestrian;
  else throw std::invalid_argument("unknown actor kind " + kind);
  return s;
}

// nlohmann writes non-finite doubles as null
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_run_log(std::ostream& out, const RunLog& log) {
  out << json{{"type", "run"}, {"scenario", to_string(log.scenario)}, {"seed", log.seed},
              {"tick_hz", log.tick_hz}, {"perception_hz", log.perception_hz}}.dump()
      << '\n';
  for (const auto& tick : log.ticks) {
    json obstacles = json::array();
    for (const auto& ob : tick.obstacles) {
      obstacles.push_back({{"id", ob.id}, {"state", to_json(ob.state)}, {"distance", ob.distance},
                           {"visible_fraction", ob.visible_fraction}, {"occ", static_cast<int>(ob.occlusion)},
                           {"eligible", ob.eligible},
                           {"detected", ob.detected ? json(*ob.detected) : json(nullptr)}});
    }
    json perceived = json::array();
    for (const auto& d : tick.perceived) {
      perceived.push_back({{"source_id", d.source_id}, {"x", d.position.x}, {"y", d.position.y}});
    }
    out << json{{"type", "tick"}, {"tick", tick.tick}, {"t", tick.t}, {"ego", to_json(tick.ego)},
                {"acceleration", tick.acceleration}, {"perception", tick.perception_tick},
                {"obstacles", std::move(obstacles)}, {"perceived", std::move(perceived)}}.dump()
        << '\n';
  }
  const auto& o = log.outcome;
  out << json{{"type", "outcome"}, {"end", to_string(o.end)}, {"abort_reason", o.abort_reason},
              {"min_distance", number_or_null(o.min_distance)},
              {"critical_obstacle", o.critical_obstacle ? json(*o.critical_obstacle) : json(nullptr)}}.dump()
      << '\n';
}

RunLog read_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  int line_no = 0;
  bool header = false, outcome = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "run") {
        const auto id = scenario_from_name(j.at("scenario").get<std::string>());
        if (!id) throw std::invalid_argument("unknown scenario");
        log.scenario = *id;
        log.seed = j.at("seed").get<std::uint64_t>();
        log.tick_hz = j.at("tick_hz").get<double>();
        log.perception_hz = j.at("perception_hz").get<double>();
        header = true;
      } else if (type == "tick") {
        TickRecord t;
        t.tick = j.at("tick").get<int>();
        t.t = j.at("t").get<double>();
        t.ego = actor_from_json(j.at("ego"));
        t.acceleration = j.at("acceleration").get<double>();
        t.perception_tick = j.at("perception").get<bool>();
        for (const auto& o : j.at("obstacles")) {
          ObstacleRecord ob;
          ob.id = o.at("id").get<ObjectId>();
          ob.state = actor_from_json(o.at("state"));
          ob.distance = o.at("distance").get<double>();
          ob.visible_fraction = o.at("visible_fraction").get<double>();
          const auto occ = occlusion_from_index(o.at("occ").get<int>());
          if (!occ) throw std::invalid_argument("bad occlusion level");
          ob.occlusion = *occ;
          ob.eligible = o.at("eligible").get<bool>();
          if (!o.at("detected").is_null()) ob.detected = o.at("detected").get<bool>();
          t.obstacles.push_back(std::move(ob));
        }
        for (const auto& d : j.at("perceived")) {
          t.perceived.push_back({d.at("source_id").get<ObjectId>(), {d.at("x").get<double>(), d.at("y").get<double>()}});
        }
        log.ticks.push_back(std::move(t));
      } else if (type == "outcome") {
        const auto end = end_reason_from_name(j.at("end").get<std::string>());
        if (!end) throw std::invalid_argument("unknown end reason");
        log.outcome.end = *end;
        log.outcome.abort_reason = j.at("abort_reason").get<std::string>();
        const auto& md = j.at("min_distance");
        log.outcome.min_distance = md.is_null() ? std::numeric_limits<double>::infinity() : md.get<double>();
        if (!j.at("critical_obstacle").is_null()) log.outcome.critical_obstacle = j.at("critical_obstacle").get<ObjectId>();
        outcome = true;
      } else {
        throw std::invalid_argument("unknown record type " + type);
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("run log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header || !outcome) throw std::invalid_argument("run log is missing its header or outcome line");
  return log;
}

}  // namespace pem::sim
