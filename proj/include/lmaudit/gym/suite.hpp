#pragma once

#include <filesystem>
#include <vector>

#include "lmaudit/gym/scenario.hpp"
#include "lmaudit/model/enums.hpp"

namespace lmaudit::gym {

/// Secure/insecure twin covering one taxonomy cell. The two scenarios differ
/// in exactly one field and their expected outcomes differ in exactly the
/// flipped restriction type.
struct ScenarioPair {
  std::string insecure_id;
  std::string secure_id;
  model::RestrictionType flipped;
};

/// The bundled scenario suite: a secure and an insecure variant for every
/// cell of the restriction taxonomy plus case-study scenarios (token
/// refresh, parse drift, content-bound tokens, streaming, combined stacks).
const std::vector<GymScenario>& bundled_scenarios();

const std::vector<ScenarioPair>& scenario_pairs();

const GymScenario& scenario_by_id(const std::string& id);

/// Write one JSON file per scenario into `dir`.
void write_scenario_suite(const std::filesystem::path& dir);

/// Load every *.json scenario in a directory, sorted by id.
std::vector<GymScenario> load_scenario_suite(const std::filesystem::path& dir);

}  // namespace lmaudit::gym
