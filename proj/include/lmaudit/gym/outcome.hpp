#pragma once

#include <array>

#include "lmaudit/gym/scenario.hpp"
#include "lmaudit/model/enums.hpp"

namespace lmaudit::gym {

/// What the pipeline is expected to establish against a scenario, derived
/// deterministically from the scenario by the published rule table (see
/// docs in the scenario suite).
struct ExpectedOutcome {
  std::array<model::ExpectedStatus, 4> per_type{
      model::ExpectedStatus::NotPresent, model::ExpectedStatus::NotPresent,
      model::ExpectedStatus::NotPresent, model::ExpectedStatus::NotPresent};
  bool plan_synthesizable = true;

  model::ExpectedStatus expected(model::RestrictionType type) const {
    return per_type[static_cast<std::size_t>(type)];
  }

  friend bool operator==(const ExpectedOutcome&, const ExpectedOutcome&) = default;
};

void to_json(json& j, const ExpectedOutcome& o);
void from_json(const json& j, ExpectedOutcome& o);

/// The rule table. Pure function of the scenario.
ExpectedOutcome expected_outcome(const GymScenario& s);

/// Agreement between a prediction and a measured status:
///   Bypassable    <=> measured Bypassed,
///   NotBypassable <=> anything but Bypassed (the restriction held),
///   NotPresent    <=> NotDetected.
bool outcome_agrees(model::ExpectedStatus expected, model::RestrictionStatus measured);

}  // namespace lmaudit::gym
