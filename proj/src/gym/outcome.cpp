#include "lmaudit/gym/outcome.hpp"

namespace lmaudit::gym {

using model::ExpectedStatus;
using model::RestrictionStatus;
using model::RestrictionType;

namespace {

struct Facet {
  bool bypassable;
};

ExpectedStatus aggregate(const std::vector<Facet>& facets) {
  if (facets.empty()) return ExpectedStatus::NotPresent;
  for (const auto& f : facets) {
    if (f.bypassable) return ExpectedStatus::Bypassable;
  }
  return ExpectedStatus::NotBypassable;
}

bool preprompt_defeatable(const GymScenario& s) {
  // App-added pre-prompts can be removed from the request; weakly articulated
  // ones can be talked around.
  return s.preprompt.location == PrepromptLocation::App ||
         s.preprompt.strength == PrepromptStrength::Weak;
}

std::vector<Facet> quota_facets(const GymScenario& s) {
  std::vector<Facet> facets;
  if (s.quota.limit > 0 && s.token_auth()) {
    bool bypass = s.quota.tracking == QuotaTracking::Client ||
                  s.quota.token_oracle == TokenOracle::Open;
    facets.push_back({bypass});
  }
  if (s.input_length.limit > 0) {
    facets.push_back({s.input_length.enforcement == InputEnforcement::UiOnly});
  }
  if (s.output.clipping != OutputClipping::None) {
    facets.push_back({s.output.clipping == OutputClipping::AppSide});
  }
  if (s.token_cap_active()) {
    facets.push_back({s.output.max_tokens_source == MaxTokensSource::Client});
  }
  if (s.preprompt.has_role(PrepromptRole::OutputLength)) {
    facets.push_back({preprompt_defeatable(s)});
  }
  return facets;
}

std::vector<Facet> topic_facets(const GymScenario& s) {
  std::vector<Facet> facets;
  if (s.topic.policy != TopicPolicy::Restricted) return facets;
  switch (s.topic.enforcement) {
    case TopicEnforcement::PrepromptWeak:
      facets.push_back({true});
      break;
    case TopicEnforcement::PrepromptStrict:
      // Removable only when the app concatenates the pre-prompt itself.
      facets.push_back({s.preprompt.location == PrepromptLocation::App});
      break;
    case TopicEnforcement::StructuredInput:
    case TopicEnforcement::NoInput:
      // The app-side structure holds; bypassability rides on whether the
      // model behind it honors smuggled instructions.
      facets.push_back({s.preprompt.strength == PrepromptStrength::Weak});
      break;
  }
  return facets;
}

std::vector<Facet> moderation_facets(const GymScenario& s) {
  std::vector<Facet> facets;
  switch (s.moderation.mode) {
    case ModerationMode::None:
      break;
    case ModerationMode::IntegratedWeak:
      facets.push_back({true});
      break;
    case ModerationMode::IntegratedHardened:
      facets.push_back({false});
      break;
    case ModerationMode::DedicatedClientRouted:
      facets.push_back({true});  // skipping the moderation hop
      break;
    case ModerationMode::DedicatedServerRouted:
      facets.push_back({false});
      break;
  }
  if (s.preprompt.has_role(PrepromptRole::Moderation)) {
    facets.push_back({preprompt_defeatable(s)});
  }
  return facets;
}

std::vector<Facet> pip_facets(const GymScenario& s) {
  std::vector<Facet> facets;
  if (s.preprompt.has_role(PrepromptRole::Data)) {
    facets.push_back({preprompt_defeatable(s)});
  }
  if (s.topology == model::Topology::PluginStyle) {
    // Plugin rules live behind a login wall; the model itself can leak them.
    facets.push_back({s.preprompt.strength == PrepromptStrength::Weak});
  }
  return facets;
}

}  // namespace

ExpectedOutcome expected_outcome(const GymScenario& s) {
  ExpectedOutcome out;
  out.plan_synthesizable = !s.token_binding.content_bound;
  out.per_type[static_cast<std::size_t>(RestrictionType::QuotaR)] =
      aggregate(quota_facets(s));
  out.per_type[static_cast<std::size_t>(RestrictionType::TopicR)] =
      aggregate(topic_facets(s));
  out.per_type[static_cast<std::size_t>(RestrictionType::ModR)] =
      aggregate(moderation_facets(s));
  out.per_type[static_cast<std::size_t>(RestrictionType::PipR)] = aggregate(pip_facets(s));

  if (!out.plan_synthesizable) {
    // Without a replayable plan nothing is measurable; content-bound tokens
    // leave every present restriction standing.
    for (auto& cell : out.per_type) {
      if (cell == ExpectedStatus::Bypassable) cell = ExpectedStatus::NotBypassable;
    }
    // The content binding itself is a quota/payment wall that holds.
    out.per_type[static_cast<std::size_t>(RestrictionType::QuotaR)] =
        ExpectedStatus::NotBypassable;
  }
  return out;
}

void to_json(json& j, const ExpectedOutcome& o) {
  j = json{{"quota_r", o.expected(RestrictionType::QuotaR)},
           {"topic_r", o.expected(RestrictionType::TopicR)},
           {"mod_r", o.expected(RestrictionType::ModR)},
           {"pip_r", o.expected(RestrictionType::PipR)},
           {"plan_synthesizable", o.plan_synthesizable}};
}

void from_json(const json& j, ExpectedOutcome& o) {
  o = ExpectedOutcome{};
  o.per_type[0] = j.at("quota_r").get<ExpectedStatus>();
  o.per_type[1] = j.at("topic_r").get<ExpectedStatus>();
  o.per_type[2] = j.at("mod_r").get<ExpectedStatus>();
  o.per_type[3] = j.at("pip_r").get<ExpectedStatus>();
  j.at("plan_synthesizable").get_to(o.plan_synthesizable);
}

bool outcome_agrees(ExpectedStatus expected, RestrictionStatus measured) {
  switch (expected) {
    case ExpectedStatus::Bypassable:
      return measured == RestrictionStatus::Bypassed;
    case ExpectedStatus::NotBypassable:
      return measured != RestrictionStatus::Bypassed;
    case ExpectedStatus::NotPresent:
      return measured == RestrictionStatus::NotDetected;
  }
  return false;
}

}  // namespace lmaudit::gym
