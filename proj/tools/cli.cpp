#include "cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "pem/core/model_io.hpp"
#include "pem/learn/learner.hpp"
#include "pem/server/client.hpp"
#include "pem/server/server.hpp"
#include "pem/sim/config.hpp"
#include "pem/sim/experiment.hpp"

#ifndef PEM_VERSION
#define PEM_VERSION "0.0.0"
#endif

namespace pem::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct FileRecord {
  std::string path;
  std::uintmax_t size = 0;
  std::string fnv1a;
};

json to_json(const FileRecord& r) { return {{"path", r.path}, {"size", r.size}, {"fnv1a64", r.fnv1a}}; }

FileRecord record_of(std::string path, std::string_view content) {
  return {std::move(path), content.size(), hex64(fnv1a64(content))};
}

struct Context {
  std::vector<std::string> args;
  std::string command;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int verbosity = 0;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;

  void info(const std::string& message) const {
    if (verbosity >= 1) *err << message << '\n';
  }

  std::string input(const fs::path& path) {
    std::string content = read_file(path);
    inputs.push_back(record_of(path.string(), content));
    return content;
  }

  void write(const std::string& relative, const std::string& content) {
    const fs::path path = out_dir / relative;
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    if (!f) throw IoError("failed writing " + path.string());
    outputs.push_back(record_of(relative, content));
    info("wrote " + path.string());
  }

  void write_manifest(const std::string& status, const json& extra = json::object()) {
    std::sort(outputs.begin(), outputs.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    json ins = json::array(), outs = json::array();
    for (const auto& r : inputs) ins.push_back(to_json(r));
    for (const auto& r : outputs) outs.push_back(to_json(r));
    json m = {{"tool", "pem-cli"},       {"version", PEM_VERSION},        {"command", command},
              {"args", args},            {"cwd", fs::current_path().string()}, {"seed", seed},
              {"status", status},        {"inputs", std::move(ins)},      {"outputs", std::move(outs)}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "manifest.json", std::ios::binary);
    if (!f) throw IoError("cannot write manifest in " + out_dir.string());
    f << m.dump(2) << '\n';
  }
};

// name=path, or a bare path named after its stem
std::pair<std::string, std::string> named_path(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), spec};
  if (eq == 0 || eq + 1 == spec.size()) throw UsageError("expected NAME=PATH, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

// ---------------------------------------------------------------- learn

struct LearnArgs {
  std::string dataset;
  GridSpec grid;
  learn::LearnOptions options;
  double frame_rate_hz = 2.0;
  bool serial = false;
};

void cmd_learn(Context& ctx, LearnArgs a) {
  ctx.input(a.dataset);
  validate(a.grid);
  const auto dataset = learn::load_dataset_jsonl(a.dataset, a.frame_rate_hz);
  ctx.info("loaded " + std::to_string(dataset.scenes.size()) + " scenes, " + std::to_string(dataset.frame_count()) +
           " frames");
  a.options.parallel = !a.serial;
  if (a.options.metadata.empty()) a.options.metadata = "learned from " + fs::path(a.dataset).filename().string();
  const auto result = learn::learn_pem(dataset, a.grid, a.options);

  json fields = json::array();
  for (const auto& f : result.fields) {
    fields.push_back({{"field", learn::field_name(f.field)}, {"converged", f.converged}, {"iterations", f.iterations},
                      {"gradient_norm", f.gradient_norm}, {"precision", f.precision}, {"center", f.center},
                      {"observed_conditions", f.observed_conditions}});
  }
  json conditions = json::array();
  const GridSpec& g = result.model.grid;
  for (int i = 0; i < g.n_conditions(); ++i) {
    const auto& c = result.stats.conditions[static_cast<std::size_t>(i)];
    const int cells = g.n_cells();
    conditions.push_back({{"occ", i / cells}, {"ring", (i % cells) / g.n_sectors()}, {"sector", i % g.n_sectors()},
                          {"observed", c.observed}, {"detected", c.detected}, {"transitions", c.transitions()},
                          {"samples", c.samples.size()}});
  }
  json diag = {{"scenes", dataset.scenes.size()},
               {"frames", dataset.frame_count()},
               {"total_transitions", result.stats.total_transitions()},
               {"total_observed", result.stats.total_observed()},
               {"fields", std::move(fields)},
               {"conditions", std::move(conditions)}};
  ctx.write("model.json", dump_model(result.model));
  ctx.write("diagnostics.json", diag.dump(2) + "\n");
  *ctx.out << "learned " << g.n_conditions() << " conditions from " << result.stats.total_transitions()
           << " transitions\n";
}

// ---------------------------------------------------------------- inspect

const std::vector<std::string> kParameters = {"a01", "a11", "mu_r", "mu_theta", "sigma_r", "sigma_theta", "rho", "pi1"};

double parameter_value(const ConditionParams& p, const std::string& name) {
  if (name == "a01") return p.transition.a01;
  if (name == "a11") return p.transition.a11;
  if (name == "mu_r") return p.error.mu_r;
  if (name == "mu_theta") return p.error.mu_theta;
  if (name == "sigma_r") return p.error.sigma_r;
  if (name == "sigma_theta") return p.error.sigma_theta;
  if (name == "rho") return p.error.rho;
  return stationary_detection(p.transition);
}

struct InspectArgs {
  std::string model;
  std::string parameter = "pi1";
};

void cmd_inspect(Context& ctx, const InspectArgs& a) {
  if (std::find(kParameters.begin(), kParameters.end(), a.parameter) == kParameters.end()) {
    std::string names;
    for (const auto& n : kParameters) names += (names.empty() ? "" : ", ") + n;
    throw UsageError("unknown parameter '" + a.parameter + "'; valid names: " + names);
  }
  ctx.input(a.model);
  const PemModel model = load_model(a.model);
  const GridSpec& g = model.grid;

  std::vector<std::string> params = {a.parameter};
  if (a.parameter != "pi1") params.push_back("pi1");
  for (const auto& name : params) {
    for (int occ = 0; occ < kOcclusionLevels; ++occ) {
      std::string csv = "ring,sector,value\n";
      for (int ring = 0; ring < g.n_rings(); ++ring) {
        for (int sector = 0; sector < g.n_sectors(); ++sector) {
          const auto& p = model.conditions[static_cast<std::size_t>(occ * g.n_cells() + ring * g.n_sectors() + sector)];
          csv += std::to_string(ring) + "," + std::to_string(sector) + "," + number(parameter_value(p, name)) + "\n";
        }
      }
      ctx.write(name + "_vis" + std::to_string(occ) + ".csv", csv);
    }
  }

  const int front = g.sector_of(0.0);
  std::string cone = "occ,ring," + a.parameter + (a.parameter == "pi1" ? "\n" : ",pi1\n");
  for (int occ = 0; occ < kOcclusionLevels; ++occ) {
    for (int ring = 0; ring < g.n_rings(); ++ring) {
      const auto& p = model.conditions[static_cast<std::size_t>(occ * g.n_cells() + ring * g.n_sectors() + front)];
      cone += std::to_string(occ) + "," + std::to_string(ring) + "," + number(parameter_value(p, a.parameter));
      if (a.parameter != "pi1") cone += "," + number(stationary_detection(p.transition));
      cone += "\n";
    }
  }
  ctx.write("frontal_cone.csv", cone);
  *ctx.out << "exported " << a.parameter << " for " << g.n_rings() << " rings x " << g.n_sectors() << " sectors\n";
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::vector<std::string> models;
  std::string host = "127.0.0.1";
  std::uint16_t port = server::kDefaultPort;
};

void cmd_serve(Context& ctx, const ServeArgs& a) {
  for (const auto& spec : a.models) ctx.input(named_path(spec).second);
  server::Server srv(server::load_registry(a.models), {a.host, a.port});
  ctx.write_manifest("ok", {{"port", srv.port()}});
  *ctx.out << "listening on " << a.host << ":" << srv.port() << std::endl;
  srv.run();
  ctx.info("server stopped");
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::vector<std::string> scenarios = {"TC1", "TC2", "TC3"};
  std::vector<std::string> models;
  std::vector<std::string> remotes;
  bool baseline = false;
  int runs = 500;
  int baseline_runs = 250;
  int max_logs = 10;
  bool serial = false;
  std::string sim_config;
};

struct CellPlan {
  std::string name;
  sim::PerceptionSource source;
  int runs = 0;
};

sim::RemoteSource parse_remote(const std::string& spec) {
  // model@host:port
  const auto at = spec.find('@');
  const auto colon = spec.rfind(':');
  if (at == std::string::npos || at == 0 || colon == std::string::npos || colon < at) {
    throw UsageError("expected MODEL@HOST:PORT, got '" + spec + "'");
  }
  sim::RemoteSource r;
  r.model = spec.substr(0, at);
  r.host = spec.substr(at + 1, colon - at - 1);
  try {
    const int port = std::stoi(spec.substr(colon + 1));
    if (port < 1 || port > 65535) throw std::out_of_range("port");
    r.port = static_cast<std::uint16_t>(port);
  } catch (const std::logic_error&) {
    throw UsageError("bad port in '" + spec + "'");
  }
  return r;
}

void cmd_simulate(Context& ctx, const SimulateArgs& a) {
  if (a.models.empty() && a.remotes.empty() && !a.baseline) {
    throw UsageError("nothing to simulate: give --model, --remote or --baseline");
  }
  if (a.runs < 1 || a.baseline_runs < 1) throw UsageError("run counts must be at least 1");

  std::vector<sim::ScenarioSpec> specs;
  for (const auto& name : a.scenarios) {
    const auto id = sim::scenario_from_name(name);
    if (!id) throw UsageError("unknown scenario '" + name + "' (expected TC1, TC2 or TC3)");
    if (std::none_of(specs.begin(), specs.end(), [&](const auto& s) { return s.id == *id; })) {
      specs.push_back(sim::make_scenario(*id));
    }
  }
  sim::PolicyConfig policy;
  if (!a.sim_config.empty()) {
    json cfg;
    try {
      cfg = json::parse(ctx.input(a.sim_config));
    } catch (const json::parse_error& e) {
      throw sim::ScenarioError(a.sim_config + ": " + e.what());
    }
    if (!cfg.is_object()) throw sim::ScenarioError("simulation config must be an object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "policy") {
        policy = sim::policy_from_json(value);
      } else if (key == "scenarios") {
        for (const auto& s : value) {
          const auto spec = sim::scenario_from_json(s);
          for (auto& existing : specs) {
            if (existing.id == spec.id) existing = spec;
          }
        }
      } else {
        throw sim::ScenarioError("unknown key '" + key + "' in simulation config");
      }
    }
  }

  std::vector<CellPlan> plans;
  if (a.baseline) plans.push_back({"ground-truth", sim::GroundTruthSource{}, a.baseline_runs});
  for (const auto& spec : a.models) {
    const auto [name, path] = named_path(spec);
    ctx.input(path);
    plans.push_back({name, sim::ModelSource{std::make_shared<const PemModel>(load_model(path))}, a.runs});
  }
  for (const auto& spec : a.remotes) {
    const auto remote = parse_remote(spec);
    plans.push_back({remote.model + "@" + remote.host + ":" + std::to_string(remote.port), remote, a.runs});
  }
  for (std::size_t i = 0; i < plans.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (plans[i].name == plans[j].name) throw UsageError("perception source '" + plans[i].name + "' given twice");
    }
  }

  sim::ExperimentReport report;
  std::optional<std::string> abort_reason;
  for (const auto& plan : plans) {
    for (const auto& spec : specs) {
      sim::ExperimentOptions opt;
      opt.n_runs = plan.runs;
      opt.base_seed = ctx.seed;
      opt.parallel = !a.serial;
      opt.keep_logs = a.max_logs < 0 ? plan.runs : std::min(a.max_logs, plan.runs);
      auto result = sim::run_experiment(spec, policy, plan.source, plan.name, opt);
      ctx.info(std::string(sim::to_string(spec.id)) + " " + plan.name + ": " + std::to_string(result.report.n_below) +
               " of " + std::to_string(plan.runs) + " runs below 1 m");
      for (const auto& log : result.logs) {
        std::ostringstream buf;
        sim::write_run_log(buf, log);
        ctx.write("logs/" + std::string(sim::to_string(spec.id)) + "/" + plan.name + "/seed_" +
                      std::to_string(log.seed) + ".jsonl",
                  buf.str());
      }
      const bool remote = std::holds_alternative<sim::RemoteSource>(plan.source);
      if (remote && result.report.n_aborted > 0) {
        for (const auto& r : result.report.runs) {
          if (r.aborted) {
            abort_reason = plan.name + ": " + r.abort_reason;
            break;
          }
        }
      }
      report.cells.push_back(std::move(result.report));
      if (abort_reason) break;
    }
    if (abort_reason) break;
  }

  const std::string table = sim::render_table(report);
  ctx.write("report.json", sim::report_to_json(report));
  ctx.write("report.txt", table);
  *ctx.out << table;
  if (abort_reason) {
    ctx.write_manifest("aborted", {{"abort_reason", *abort_reason}});
    throw server::ConnectionError("perception server unavailable, partial results kept: " + *abort_reason);
  }
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> run_dirs;
};

std::string histogram_rows(const std::string& metric, const sim::CellReport& cell, const std::vector<double>& values,
                           double width, int bins, bool overflow) {
  std::vector<int> counts(static_cast<std::size_t>(bins + (overflow ? 1 : 0)), 0);
  for (double v : values) {
    int b = static_cast<int>(std::floor(v / width));
    if (!overflow) b = std::min(b, bins - 1);
    b = std::clamp(b, 0, static_cast<int>(counts.size()) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  std::string rows;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const bool last = overflow && i + 1 == counts.size();
    rows += metric + "," + std::string(sim::to_string(cell.scenario)) + "," + cell.model + "," +
            number(width * static_cast<double>(i)) + "," + (last ? std::string("inf") : number(width * static_cast<double>(i + 1))) +
            "," + std::to_string(counts[i]) + "\n";
  }
  return rows;
}

void cmd_report(Context& ctx, const ReportArgs& a) {
  sim::ExperimentReport merged;
  for (const auto& dir : a.run_dirs) {
    const fs::path path = fs::path(dir) / "report.json";
    auto part = sim::report_from_json(ctx.input(path));
    for (auto& cell : part.cells) {
      const bool duplicate = std::any_of(merged.cells.begin(), merged.cells.end(), [&](const auto& c) {
        return c.scenario == cell.scenario && c.model == cell.model;
      });
      if (duplicate) {
        throw std::invalid_argument("cell " + std::string(sim::to_string(cell.scenario)) + "/" + cell.model +
                                    " appears in more than one run directory");
      }
      merged.cells.push_back(std::move(cell));
    }
  }
  sim::check_grids(merged);

  std::string runs = "scenario,model,seed,end,min_distance,detection_frequency,max_non_detection_interval\n";
  std::string hist = "metric,scenario,model,bin_lo,bin_hi,count\n";
  for (const auto& cell : merged.cells) {
    std::vector<double> dist, freq, gap;
    for (const auto& r : cell.runs) {
      runs += std::string(sim::to_string(cell.scenario)) + "," + cell.model + "," + std::to_string(r.seed) + "," +
              std::string(sim::to_string(r.end)) + "," + (r.aborted ? "" : number(r.min_distance)) + "," +
              (r.metrics ? number(r.metrics->relative_detection_frequency) : "") + "," +
              (r.metrics ? number(r.metrics->max_non_detection_interval_s) : "") + "\n";
      if (r.aborted) continue;
      dist.push_back(r.min_distance);
      if (r.metrics) {
        freq.push_back(r.metrics->relative_detection_frequency);
        gap.push_back(r.metrics->max_non_detection_interval_s);
      }
    }
    hist += histogram_rows("min_distance", cell, dist, 1.0, 30, true);
    hist += histogram_rows("detection_frequency", cell, freq, 0.1, 10, false);
    hist += histogram_rows("max_non_detection_interval", cell, gap, 0.5, 60, true);
  }
  const std::string table = sim::render_table(merged);
  ctx.write("summary.json", sim::report_to_json(merged));
  ctx.write("table.txt", table);
  ctx.write("runs.csv", runs);
  ctx.write("histograms.csv", hist);
  *ctx.out << table;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
  std::string manifest;
};

class CwdGuard {
 public:
  explicit CwdGuard(const fs::path& dir) : saved_(fs::current_path()) { fs::current_path(dir); }
  ~CwdGuard() {
    std::error_code ec;
    fs::current_path(saved_, ec);
  }
  CwdGuard(const CwdGuard&) = delete;
  CwdGuard& operator=(const CwdGuard&) = delete;

 private:
  fs::path saved_;
};

int cmd_replay(Context& ctx, const ReplayArgs& a) {
  json m;
  try {
    m = json::parse(read_file(a.manifest));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(a.manifest + ": " + e.what());
  }
  const auto command = m.at("command").get<std::string>();
  if (command == "replay" || command == "serve") {
    throw UsageError("a " + command + " manifest has no file outputs to reproduce");
  }
  const fs::path cwd = m.at("cwd").get<std::string>();
  for (const auto& in : m.at("inputs")) {
    fs::path p = in.at("path").get<std::string>();
    if (p.is_relative()) p = cwd / p;
    const std::string content = read_file(p);
    if (hex64(fnv1a64(content)) != in.at("fnv1a64").get<std::string>()) {
      throw std::invalid_argument("input " + p.string() + " changed since the recorded run");
    }
  }

  std::vector<std::string> args;
  const auto recorded = m.at("args").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (recorded[i] == "--out-dir") {
      ++i;
      continue;
    }
    if (recorded[i].rfind("--out-dir=", 0) == 0) continue;
    args.push_back(recorded[i]);
  }
  const fs::path target = fs::absolute(ctx.out_dir);
  args.insert(args.begin(), {"--out-dir", target.string()});

  int code = kOk;
  {
    CwdGuard guard(cwd);
    code = run(args, *ctx.out, *ctx.err);
  }
  if (code != kOk) return code;

  std::vector<std::string> differing;
  for (const auto& o : m.at("outputs")) {
    const auto rel = o.at("path").get<std::string>();
    std::error_code ec;
    const fs::path p = target / rel;
    if (!fs::exists(p, ec) || hex64(fnv1a64(read_file(p))) != o.at("fnv1a64").get<std::string>()) {
      differing.push_back(rel);
    }
  }
  const json fresh = json::parse(read_file(target / "manifest.json"));
  if (fresh.at("outputs").size() != m.at("outputs").size()) differing.emplace_back("(set of output files)");
  if (!differing.empty()) {
    for (const auto& d : differing) *ctx.err << "differs: " << d << '\n';
    *ctx.out << "replay: " << differing.size() << " output(s) differ\n";
    return kDataError;
  }
  *ctx.out << "replay: " << m.at("outputs").size() << " outputs identical\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perception error models: learn, inspect, serve, simulate, report"};
  app.name("pem-cli");
  app.require_subcommand(1);
  app.fallthrough();
  auto* config = app.set_config("--config", "", "TOML/INI file with option values");

  Context ctx;
  ctx.args = args;
  ctx.out = &out;
  ctx.err = &err;
  std::string out_dir = "pem-out";
  app.add_option("--seed", ctx.seed, "base seed");
  app.add_flag("-v,--verbose", ctx.verbosity, "more diagnostics on stderr");
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "fit a model from a perception dataset (JSON lines)");
  learn->add_option("dataset", learn_args.dataset, "dataset file")->required();
  learn->add_option("--sector-width", learn_args.grid.sector_width_deg, "degrees")->capture_default_str();
  learn->add_option("--ring-depth", learn_args.grid.ring_depth_m, "meters")->capture_default_str();
  learn->add_option("--max-radius", learn_args.grid.max_radius_m, "meters")->capture_default_str();
  learn->add_option("--gate", learn_args.options.gate_m, "matching gate, meters")->capture_default_str();
  learn->add_option("--alpha", learn_args.options.alpha, "spatial dependence")->capture_default_str();
  learn->add_option("--precision-shape", learn_args.options.precision_shape)->capture_default_str();
  learn->add_option("--precision-rate", learn_args.options.precision_rate)->capture_default_str();
  learn->add_option("--max-iterations", learn_args.options.max_iterations)->capture_default_str();
  learn->add_option("--tolerance", learn_args.options.tolerance)->capture_default_str();
  learn->add_option("--frame-rate", learn_args.frame_rate_hz, "dataset frame rate, Hz")->capture_default_str();
  learn->add_option("--metadata", learn_args.options.metadata, "text stored in the model");
  learn->add_flag("--serial", learn_args.serial, "no OpenMP");

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "export a model parameter as per-occlusion grid CSVs");
  inspect->add_option("model", inspect_args.model, "model file")->required();
  inspect->add_option("--parameter", inspect_args.parameter, "a01, a11, mu_r, mu_theta, sigma_r, sigma_theta, rho, pi1")
      ->capture_default_str();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "host models over TCP");
  serve->add_option("--model", serve_args.models, "NAME=PATH or PATH")->required();
  serve->add_option("--host", serve_args.host)->capture_default_str();
  serve->add_option("--port", serve_args.port, "0 picks a free port")->capture_default_str();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "run scenarios against perception sources");
  simulate->add_option("--scenario", sim_args.scenarios, "TC1, TC2, TC3")->capture_default_str();
  simulate->add_option("--model", sim_args.models, "NAME=PATH or PATH, local model");
  simulate->add_option("--remote", sim_args.remotes, "MODEL@HOST:PORT, model on a pem-cli server");
  simulate->add_flag("--baseline", sim_args.baseline, "add ground-truth perception");
  simulate->add_option("--runs", sim_args.runs, "runs per model cell")->capture_default_str();
  simulate->add_option("--baseline-runs", sim_args.baseline_runs, "runs per baseline cell")->capture_default_str();
  simulate->add_option("--max-logs", sim_args.max_logs, "run logs kept per cell, -1 for all")->capture_default_str();
  simulate->add_option("--sim-config", sim_args.sim_config, "JSON with policy and scenario overrides");
  simulate->add_flag("--serial", sim_args.serial, "no OpenMP");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "merge simulation outputs into tables and histograms");
  report->add_option("run_dirs", report_args.run_dirs, "directories holding report.json")->required();

  ReplayArgs replay_args;
  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare outputs");
  replay->add_option("manifest", replay_args.manifest, "manifest.json")->required();

  std::vector<std::string> argv_storage = {"pem-cli"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  ctx.out_dir = out_dir;
  ctx.command = app.get_subcommands().front()->get_name();

  try {
    if (config->count() > 0) ctx.input(config->as<std::string>());
    if (*learn) cmd_learn(ctx, learn_args);
    else if (*inspect) cmd_inspect(ctx, inspect_args);
    else if (*serve) {
      cmd_serve(ctx, serve_args);
      return kOk;
    } else if (*simulate) cmd_simulate(ctx, sim_args);
    else if (*report) cmd_report(ctx, report_args);
    else return cmd_replay(ctx, replay_args);
    ctx.write_manifest("ok");
    return kOk;
  } catch (const std::exception& e) {
    int code = kIoError;
    if (dynamic_cast<const learn::ConvergenceError*>(&e)) code = kConvergenceError;
    else if (dynamic_cast<const UsageError*>(&e)) code = kUsage;
    else if (dynamic_cast<const learn::NoObservationsError*>(&e) || dynamic_cast<const learn::DatasetError*>(&e) ||
             dynamic_cast<const ModelError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) code = kDataError;
    err << "error: " << e.what() << '\n';
    if (ctx.command != "replay" && !(ctx.command == "simulate" && code == kIoError &&
                                     dynamic_cast<const server::ConnectionError*>(&e))) {
      try {
        ctx.write_manifest("failed", {{"error", e.what()}, {"exit_code", code}});
      } catch (const std::exception&) {
      }
    }
    return code;
  }
}

}  // namespace pem::cli
