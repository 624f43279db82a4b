#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pem/sim/run.hpp"

namespace pem::sim {

/// Runs closer than this count as collisions.
inline constexpr double kCollisionThreshold = 1.0;

struct RunSummary {
  std::uint64_t seed = 0;
  bool aborted = false;
  std::string abort_reason;
  EndReason end = EndReason::duration;
  double min_distance = 0.0;
  std::optional<ObjectId> critical_obstacle;
  std::optional<PerceptionMetrics> metrics;

  bool operator==(const RunSummary&) const = default;
};

RunSummary summarize(const RunLog& log);

struct Distribution {
  int count = 0;
  double mean = 0.0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;

  bool operator==(const Distribution&) const = default;
};

Distribution describe(std::vector<double> values);

/// One (scenario, perception) cell of an experiment.
struct CellReport {
  ScenarioId scenario = ScenarioId::tc1;
  std::string model;
  std::string grid;  ///< model grid signature, empty for ground truth
  bool baseline = false;
  std::uint64_t base_seed = 0;
  int n_runs = 0;
  int n_aborted = 0;
  int n_below = 0;      ///< min distance < 1 m
  int n_at_least = 0;   ///< min distance >= 1 m
  Distribution min_distance;
  Distribution detection_frequency;
  Distribution max_non_detection_interval;
  std::vector<RunSummary> runs;  ///< ordered by seed

  /// Bin fractions over non-aborted runs; nullopt when every run aborted.
  std::optional<double> fraction_below() const;
  std::optional<double> fraction_at_least() const;

  bool operator==(const CellReport&) const = default;
};

struct ExperimentOptions {
  int n_runs = 1;
  std::uint64_t base_seed = 0;
  bool parallel = true;
  int keep_logs = 0;  ///< logs of the first this-many seeds are returned
};

struct CellResult {
  CellReport report;
  std::vector<RunLog> logs;
};

/// Runs seeds base_seed .. base_seed + n_runs - 1 and folds the results in
/// seed order, so the report does not depend on `parallel`.
CellResult run_experiment(const ScenarioSpec& spec, const PolicyConfig& policy, const PerceptionSource& source,
                          const std::string& model_name, const ExperimentOptions& options);

struct ExperimentReport {
  std::vector<CellReport> cells;

  bool operator==(const ExperimentReport&) const = default;
};

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

/// Success-rate table: one row per model, columns TC x {<1m, >=1m}.
std::string render_table(const ExperimentReport& report);

/// "30/10/100": sector width, ring depth, radius.
std::string grid_signature(const GridSpec& grid);

/// Throws std::invalid_argument if one model name appears with two grids.
void check_grids(const ExperimentReport& report);

}  // namespace pem::sim
