#pragma once

#include <json.hpp>

#include "pem/sim/policy.hpp"
#include "pem/sim/scenario.hpp"

namespace pem::sim {

nlohmann::ordered_json to_json(const ScenarioSpec& spec);
nlohmann::ordered_json to_json(const PolicyConfig& cfg);

/// Starts from make_scenario(id) and overrides the keys present in `j`;
/// unknown keys are rejected. The result is validated.
ScenarioSpec scenario_from_json(const nlohmann::ordered_json& j);
PolicyConfig policy_from_json(const nlohmann::ordered_json& j);

}  // namespace pem::sim
