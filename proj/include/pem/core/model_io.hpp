#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pem/core/model.hpp"

namespace pem {

// Model file layout:
//   {"metadata": str,
//    "grid": {"sector_width_deg", "ring_depth_m", "max_radius_m"},
//    "conditions": [{"occ", "ring", "sector", "a01", "a11",
//                    "mu_r", "mu_theta", "sigma_r", "sigma_theta", "rho"}, ...]}
// Conditions are written in index order and must cover the grid exactly once.
// Parse and validation failures throw ModelError naming the field.

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const PemModel& model);
PemModel model_from_json(const nlohmann::json& j);

std::string dump_model(const PemModel& model);
PemModel parse_model(const std::string& text);

void save_model(const PemModel& model, const std::filesystem::path& path);
PemModel load_model(const std::filesystem::path& path);

}  // namespace pem
