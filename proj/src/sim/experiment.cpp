#include "pem/sim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pem::sim {

RunSummary summarize(const RunLog& log) {
  RunSummary s;
  s.seed = log.seed;
  s.aborted = log.outcome.aborted();
  s.abort_reason = log.outcome.abort_reason;
  s.end = log.outcome.end;
  s.min_distance = log.outcome.min_distance;
  s.critical_obstacle = log.outcome.critical_obstacle;
  if (!s.aborted) s.metrics = perception_metrics(log);
  return s;
}

Distribution describe(std::vector<double> values) {
  Distribution d;
  d.count = static_cast<int>(values.size());
  if (values.empty()) return d;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  d.mean = sum / d.count;
  d.min = values.front();
  d.max = values.back();
  const std::size_t n = values.size();
  d.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return d;
}

std::optional<double> CellReport::fraction_below() const {
  const int valid = n_below + n_at_least;
  if (valid == 0) return std::nullopt;
  return static_cast<double>(n_below) / valid;
}

std::optional<double> CellReport::fraction_at_least() const {
  const int valid = n_below + n_at_least;
  if (valid == 0) return std::nullopt;
  return static_cast<double>(n_at_least) / valid;
}

std::string grid_signature(const GridSpec& grid) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%g/%g/%g", grid.sector_width_deg, grid.ring_depth_m, grid.max_radius_m);
  return buf;
}

CellResult run_experiment(const ScenarioSpec& spec, const PolicyConfig& policy, const PerceptionSource& source,
                          const std::string& model_name, const ExperimentOptions& options) {
  if (options.n_runs < 1) throw std::invalid_argument("an experiment needs at least one run");
  validate(spec);
  validate(policy);

  const int n = options.n_runs;
  const int keep = std::clamp(options.keep_logs, 0, n);
  std::vector<RunSummary> summaries(static_cast<std::size_t>(n));
  std::vector<RunLog> logs(static_cast<std::size_t>(keep));

  auto one = [&](int i) {
    RunLog log = run_once(spec, policy, source, options.base_seed + static_cast<std::uint64_t>(i));
    summaries[static_cast<std::size_t>(i)] = summarize(log);
    if (i < keep) logs[static_cast<std::size_t>(i)] = std::move(log);
  };
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) one(i);
  } else {
    for (int i = 0; i < n; ++i) one(i);
  }

  CellResult result;
  CellReport& r = result.report;
  r.scenario = spec.id;
  r.model = model_name;
  r.baseline = std::holds_alternative<GroundTruthSource>(source);
  if (const auto* local = std::get_if<ModelSource>(&source)) r.grid = grid_signature(local->model->grid);
  r.base_seed = options.base_seed;
  r.n_runs = n;
  std::vector<double> distances, frequencies, intervals;
  for (const auto& s : summaries) {
    if (s.aborted) {
      ++r.n_aborted;
      continue;
    }
    (s.min_distance < kCollisionThreshold ? r.n_below : r.n_at_least) += 1;
    distances.push_back(s.min_distance);
    if (s.metrics) {
      frequencies.push_back(s.metrics->relative_detection_frequency);
      intervals.push_back(s.metrics->max_non_detection_interval_s);
    }
  }
  r.min_distance = describe(std::move(distances));
  r.detection_frequency = describe(std::move(frequencies));
  r.max_non_detection_interval = describe(std::move(intervals));
  r.runs = std::move(summaries);
  result.logs = std::move(logs);
  return result;
}

namespace {

using json = nlohmann::ordered_json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json to_json(const Distribution& d) {
  return {{"count", d.count}, {"mean", d.mean}, {"min", number_or_null(d.min)},
          {"median", number_or_null(d.median)}, {"max", number_or_null(d.max)}};
}

Distribution distribution_from(const json& j) {
  return {j.at("count").get<int>(), j.at("mean").get<double>(), number_from(j.at("min")),
          number_from(j.at("median")), number_from(j.at("max"))};
}

json optional_number(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json runs = json::array();
    for (const auto& s : c.runs) {
      runs.push_back({{"seed", s.seed}, {"aborted", s.aborted}, {"abort_reason", s.abort_reason},
                      {"end", to_string(s.end)}, {"min_distance", number_or_null(s.min_distance)},
                      {"critical_obstacle", s.critical_obstacle ? json(*s.critical_obstacle) : json(nullptr)},
                      {"detection_frequency", s.metrics ? json(s.metrics->relative_detection_frequency) : json(nullptr)},
                      {"max_non_detection_interval", s.metrics ? json(s.metrics->max_non_detection_interval_s) : json(nullptr)},
                      {"eligible_ticks", s.metrics ? json(s.metrics->eligible_ticks) : json(nullptr)}});
    }
    cells.push_back({{"scenario", to_string(c.scenario)}, {"model", c.model}, {"grid", c.grid},
                     {"baseline", c.baseline}, {"base_seed", c.base_seed}, {"n_runs", c.n_runs},
                     {"n_aborted", c.n_aborted}, {"n_below_1m", c.n_below}, {"n_at_least_1m", c.n_at_least},
                     {"fraction_below_1m", optional_number(c.fraction_below())},
                     {"fraction_at_least_1m", optional_number(c.fraction_at_least())},
                     {"min_distance", to_json(c.min_distance)},
                     {"detection_frequency", to_json(c.detection_frequency)},
                     {"max_non_detection_interval", to_json(c.max_non_detection_interval)},
                     {"runs", std::move(runs)}});
  }
  return json{{"cells", std::move(cells)}}.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
  ExperimentReport report;
  try {
    const json j = json::parse(text);
    for (const auto& c : j.at("cells")) {
      CellReport r;
      const auto id = scenario_from_name(c.at("scenario").get<std::string>());
      if (!id) throw std::invalid_argument("unknown scenario");
      r.scenario = *id;
      r.model = c.at("model").get<std::string>();
      r.grid = c.at("grid").get<std::string>();
      r.baseline = c.at("baseline").get<bool>();
      r.base_seed = c.at("base_seed").get<std::uint64_t>();
      r.n_runs = c.at("n_runs").get<int>();
      r.n_aborted = c.at("n_aborted").get<int>();
      r.n_below = c.at("n_below_1m").get<int>();
      r.n_at_least = c.at("n_at_least_1m").get<int>();
      r.min_distance = distribution_from(c.at("min_distance"));
      r.detection_frequency = distribution_from(c.at("detection_frequency"));
      r.max_non_detection_interval = distribution_from(c.at("max_non_detection_interval"));
      for (const auto& s : c.at("runs")) {
        RunSummary rs;
        rs.seed = s.at("seed").get<std::uint64_t>();
        rs.aborted = s.at("aborted").get<bool>();
        rs.abort_reason = s.at("abort_reason").get<std::string>();
        const auto end = end_reason_from_name(s.at("end").get<std::string>());
        if (!end) throw std::invalid_argument("unknown end reason");
        rs.end = *end;
        rs.min_distance = number_from(s.at("min_distance"));
        if (!s.at("critical_obstacle").is_null()) rs.critical_obstacle = s.at("critical_obstacle").get<ObjectId>();
        if (!s.at("detection_frequency").is_null()) {
          rs.metrics = PerceptionMetrics{s.at("detection_frequency").get<double>(),
                                         s.at("max_non_detection_interval").get<double>(),
                                         s.at("eligible_ticks").get<int>()};
        }
        r.runs.push_back(std::move(rs));
      }
      if (r.n_below + r.n_at_least + r.n_aborted != r.n_runs) throw std::invalid_argument("cell counts do not add up");
      report.cells.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
  return report;
}

void check_grids(const ExperimentReport& report) {
  std::map<std::string, std::string> seen;
  for (const auto& c : report.cells) {
    const auto [it, fresh] = seen.emplace(c.model, c.grid);
    if (!fresh && it->second != c.grid) {
      throw std::invalid_argument("model '" + c.model + "' appears with grids " + it->second + " and " + c.grid);
    }
  }
}

std::string render_table(const ExperimentReport& report) {
  std::vector<std::string> models;
  std::vector<ScenarioId> scenarios;
  for (const auto& c : report.cells) {
    if (std::find(models.begin(), models.end(), c.model) == models.end()) models.push_back(c.model);
    if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end()) scenarios.push_back(c.scenario);
  }
  std::sort(scenarios.begin(), scenarios.end());

  std::size_t name_width = 5;
  for (const auto& m : models) name_width = std::max(name_width, m.size());

  std::ostringstream out;
  char buf[64];
  out << std::string(name_width, ' ');
  for (ScenarioId s : scenarios) {
    std::snprintf(buf, sizeof buf, " | %-17s", std::string(to_string(s)).c_str());
    out << buf;
  }
  out << "\n" << "Model" << std::string(name_width - 5, ' ');
  for (std::size_t i = 0; i < scenarios.size(); ++i) out << " |     <1m     >=1m";
  out << "\n" << std::string(name_width, '-');
  for (std::size_t i = 0; i < scenarios.size(); ++i) out << "-+------------------";
  out << "\n";
  for (const auto& m : models) {
    out << m << std::string(name_width - m.size(), ' ');
    for (ScenarioId s : scenarios) {
      const auto it = std::find_if(report.cells.begin(), report.cells.end(),
                                   [&](const CellReport& c) { return c.model == m && c.scenario == s; });
      if (it == report.cells.end() || !it->fraction_below()) {
        out << " |        -        -";
        continue;
      }
      std::snprintf(buf, sizeof buf, " | %7.1f%% %7.1f%%", 100.0 * *it->fraction_below(), 100.0 * *it->fraction_at_least());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace pem::sim
