#include "pem/core/model_io.hpp"

#include <fstream>
#include <sstream>

namespace pem {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ModelError(key, where + "missing field '" + key + "'");
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where = {}) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ModelError(key, where + "field '" + key + "' is not a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw ModelError(key, where + "field '" + key + "' is not an integer");
  return v.get<int>();
}

std::string cell_label(int occ, int ring, int sector) {
  std::ostringstream out;
  out << "condition (occ=" << occ << ", ring=" << ring << ", sector=" << sector << "): ";
  return out.str();
}

}  // namespace

json grid_to_json(const GridSpec& grid) {
  return {{"sector_width_deg", grid.sector_width_deg},
          {"ring_depth_m", grid.ring_depth_m},
          {"max_radius_m", grid.max_radius_m}};
}

GridSpec grid_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("grid", "grid must be an object");
  GridSpec grid;
  grid.sector_width_deg = number(j, "sector_width_deg", "grid: ");
  grid.ring_depth_m = number(j, "ring_depth_m", "grid: ");
  grid.max_radius_m = number(j, "max_radius_m", "grid: ");
  try {
    validate(grid);
  } catch (const GridError& e) {
    throw ModelError("grid", std::string("grid: ") + e.what());
  }
  return grid;
}

json model_to_json(const PemModel& model) {
  json conditions = json::array();
  for (int i = 0; i < static_cast<int>(model.conditions.size()); ++i) {
    const ConditionCell cell = unindex({i}, model.grid);
    const ConditionParams& p = model.conditions[static_cast<std::size_t>(i)];
    conditions.push_back({{"occ", static_cast<int>(cell.occlusion)},
                          {"ring", cell.ring},
                          {"sector", cell.sector},
                          {"a01", p.transition.a01},
                          {"a11", p.transition.a11},
                          {"mu_r", p.error.mu_r},
                          {"mu_theta", p.error.mu_theta},
                          {"sigma_r", p.error.sigma_r},
                          {"sigma_theta", p.error.sigma_theta},
                          {"rho", p.error.rho}});
  }
  return {{"metadata", model.metadata},
          {"grid", grid_to_json(model.grid)},
          {"conditions", std::move(conditions)}};
}

PemModel model_from_json(const json& j) {
  if (!j.is_object()) throw ModelError("model", "model document must be a JSON object");
  PemModel model;
  if (j.contains("metadata")) {
    if (!j.at("metadata").is_string()) throw ModelError("metadata", "metadata must be a string");
    model.metadata = j.at("metadata").get<std::string>();
  }
  model.grid = grid_from_json(require(j, "grid", ""));

  const json& conds = require(j, "conditions", "");
  if (!conds.is_array()) throw ModelError("conditions", "conditions must be an array");

  const int n = model.grid.n_conditions();
  model.conditions.resize(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);

  for (const json& c : conds) {
    const int occ = integer(c, "occ", "condition: ");
    const int ring = integer(c, "ring", "condition: ");
    const int sector = integer(c, "sector", "condition: ");
    const std::string where = cell_label(occ, ring, sector);
    if (occ < 0 || occ >= kOcclusionLevels) throw ModelError("occ", where + "occ out of range");
    if (ring < 0 || ring >= model.grid.n_rings()) throw ModelError("ring", where + "ring out of range");
    if (sector < 0 || sector >= model.grid.n_sectors()) {
      throw ModelError("sector", where + "sector out of range");
    }
    const Condition cond = index_of({static_cast<OcclusionLevel>(occ), ring, sector}, model.grid);
    const auto slot = static_cast<std::size_t>(cond.index);
    if (seen[slot]) throw ModelError("conditions", where + "listed twice");
    seen[slot] = true;

    ConditionParams p;
    p.transition.a01 = number(c, "a01", where);
    p.transition.a11 = number(c, "a11", where);
    p.error.mu_r = number(c, "mu_r", where);
    p.error.mu_theta = number(c, "mu_theta", where);
    p.error.sigma_r = number(c, "sigma_r", where);
    p.error.sigma_theta = number(c, "sigma_theta", where);
    p.error.rho = number(c, "rho", where);
    try {
      validate(p);
    } catch (const ModelError& e) {
      throw ModelError(e.field(), where + e.what());
    }
    model.conditions[slot] = p;
  }

  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      const ConditionCell cell = unindex({i}, model.grid);
      throw ModelError("conditions", cell_label(static_cast<int>(cell.occlusion), cell.ring,
                                                cell.sector) +
                                         "missing; conditions must be exhaustive");
    }
  }
  return model;
}

std::string dump_model(const PemModel& model) { return model_to_json(model).dump(1) + "\n"; }

PemModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError("document", std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const PemModel& model, const std::filesystem::path& path) {
  validate(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << dump_model(model);
  if (!out) throw std::runtime_error("failed writing model file " + path.string());
}

PemModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace pem
