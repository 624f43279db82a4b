#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pem/core/injector.hpp"
#include "pem/sim/policy.hpp"
#include "pem/sim/scenario.hpp"

namespace pem::sim {

/// Error-free perception: the policy receives every scripted actor.
struct GroundTruthSource {};

struct ModelSource {
  std::shared_ptr<const PemModel> model;
};

/// A pem-server endpoint hosting `model`; each run opens its own session.
struct RemoteSource {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string model;
};

using PerceptionSource = std::variant<GroundTruthSource, ModelSource, RemoteSource>;

/// Obstacles farther than this (center to center) do not count toward the
/// perception metrics.
inline constexpr double kMetricRange = 100.0;

struct ObstacleRecord {
  ObjectId id = 0;
  ActorState state;
  double distance = 0.0;  ///< footprint gap to the ego
  double visible_fraction = 1.0;
  OcclusionLevel occlusion = OcclusionLevel::vis3;
  bool eligible = false;          ///< within kMetricRange of the ego
  std::optional<bool> detected;   ///< set on perception ticks only

  bool operator==(const ObstacleRecord&) const = default;
};

struct TickRecord {
  int tick = 0;
  double t = 0.0;
  ActorState ego;
  double acceleration = 0.0;
  bool perception_tick = false;
  std::vector<ObstacleRecord> obstacles;
  /// Fresh perceived world, ego frame; empty on hold ticks.
  std::vector<CartesianDetection> perceived;

  bool operator==(const TickRecord&) const = default;
};

enum class EndReason { duration, road_end, collision, aborted };

std::string_view to_string(EndReason reason);
std::optional<EndReason> end_reason_from_name(std::string_view name);

struct RunOutcome {
  EndReason end = EndReason::duration;
  std::string abort_reason;
  double min_distance = 0.0;
  std::optional<ObjectId> critical_obstacle;  ///< obstacle at min distance, lowest id on ties

  bool collided() const { return end == EndReason::collision; }
  bool aborted() const { return end == EndReason::aborted; }
  bool operator==(const RunOutcome&) const = default;
};

struct RunLog {
  ScenarioId scenario = ScenarioId::tc1;
  std::uint64_t seed = 0;
  double tick_hz = 10.0;
  double perception_hz = 2.0;
  std::vector<TickRecord> ticks;
  RunOutcome outcome;

  bool operator==(const RunLog&) const = default;
};

/// Simulates one run. Never throws for perception-source failures: the run
/// stops and is flagged aborted with the reason.
RunLog run_once(const ScenarioSpec& spec, const PolicyConfig& policy, const PerceptionSource& source,
                std::uint64_t seed);

/// Smallest footprint gap between the ego and any obstacle over the log.
double min_distance(const RunLog& log);

struct PerceptionMetrics {
  double relative_detection_frequency = 0.0;
  double max_non_detection_interval_s = 0.0;
  int eligible_ticks = 0;

  bool operator==(const PerceptionMetrics&) const = default;
};

/// Metrics over a detection sequence of perception ticks; nullopt entries
/// are ineligible ticks and end a run of misses. Nullopt when no tick is
/// eligible.
std::optional<PerceptionMetrics> metrics_from_pattern(std::span<const std::optional<bool>> pattern,
                                                      double perception_period_s);

std::optional<PerceptionMetrics> perception_metrics(const RunLog& log, ObjectId obstacle);

/// Metrics for the run's critical obstacle.
std::optional<PerceptionMetrics> perception_metrics(const RunLog& log);

/// JSON lines: a header, one line per tick, then the outcome.
void write_run_log(std::ostream& out, const RunLog& log);
RunLog read_run_log(std::istream& in);

}  // namespace pem::sim
