#include "lmaudit/gym/suite.hpp"

#include <algorithm>

#include "lmaudit/model/error.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::gym {

using model::Provider;
using model::RestrictionType;
using model::Topology;

namespace {

GymScenario base_scenario(std::string id) {
  GymScenario s;
  s.id = std::move(id);
  s.topology = Topology::SelfHostedViaAppServer;
  s.quota = {0, QuotaTracking::Server, TokenOracle::Open};
  s.credentials.provider = Provider::OpenAi;
  s.recording.noise_entries = 60;
  return s;
}

std::vector<GymScenario> build_suite() {
  std::vector<GymScenario> suite;

  // -- Quota-R / output-length pre-prompt (R-LM) ---------------------------
  {
    auto s = base_scenario("quota-outlen-preprompt-app");
    s.preprompt = {PrepromptLocation::App, "", PrepromptStrength::Strict,
                   {PrepromptRole::OutputLength}};
    s.output.max_tokens = 120;
    suite.push_back(s);
    s.id = "quota-outlen-preprompt-server";
    s.preprompt.location = PrepromptLocation::Server;
    suite.push_back(s);

    // Weakly articulated variant: a longer-response instruction defeats it.
    s.id = "quota-outlen-preprompt-weak";
    s.preprompt.strength = PrepromptStrength::Weak;
    suite.push_back(s);
  }

  // -- Quota-R / max output tokens (R-LM) ----------------------------------
  {
    auto s = base_scenario("quota-maxtokens-client");
    s.output = {OutputClipping::None, MaxTokensSource::Client, 120};
    suite.push_back(s);
    s.id = "quota-maxtokens-server";
    s.output.max_tokens_source = MaxTokensSource::Server;
    suite.push_back(s);
  }

  // -- Quota-R / payments and token oracles (R-App) ------------------------
  {
    auto s = base_scenario("quota-payments-open-oracle");
    s.quota = {2, QuotaTracking::Server, TokenOracle::Open};
    s.recording.queries = 2;  // the scripted session spends its allowance
    suite.push_back(s);
    s.id = "quota-payments-closed-oracle";
    s.quota.token_oracle = TokenOracle::Closed;
    suite.push_back(s);
  }

  // Client-side tracking: the server never counts. The session token was
  // provisioned out-of-band, so refreshing is not an option either way.
  {
    auto s = base_scenario("quota-tracking-client");
    s.quota = {2, QuotaTracking::Client, TokenOracle::Closed};
    s.recording.record_mint_entry = false;
    suite.push_back(s);
    s.id = "quota-tracking-server";
    s.quota.tracking = QuotaTracking::Server;
    suite.push_back(s);
  }

  // -- Quota-R / limited input length (R-App) ------------------------------
  {
    auto s = base_scenario("quota-inputlen-ui");
    s.input_length = {120, InputEnforcement::UiOnly};
    suite.push_back(s);
    s.id = "quota-inputlen-server";
    s.input_length.enforcement = InputEnforcement::Server;
    suite.push_back(s);
  }

  // -- Quota-R / output clipping (R-App) -----------------------------------
  {
    auto s = base_scenario("quota-clipping-app");
    s.output = {OutputClipping::AppSide, MaxTokensSource::Server, 120};
    suite.push_back(s);
    s.id = "quota-clipping-server";
    s.output.clipping = OutputClipping::Server;
    suite.push_back(s);
  }

  // -- Topic-R / topic pre-prompt (R-LM) -----------------------------------
  {
    auto s = base_scenario("topic-preprompt-weak");
    s.topic = {TopicPolicy::Restricted, {"travel"}, TopicEnforcement::PrepromptWeak, {}};
    s.preprompt = {PrepromptLocation::Server, "", PrepromptStrength::Strict,
                   {PrepromptRole::Topic}};
    suite.push_back(s);
    s.id = "topic-preprompt-strict";
    s.topic.enforcement = TopicEnforcement::PrepromptStrict;
    suite.push_back(s);
  }

  // -- Topic-R / limited input choices (R-App) -----------------------------
  {
    auto s = base_scenario("topic-choices-weak");
    s.topic = {TopicPolicy::Restricted,
               {"cooking"},
               TopicEnforcement::StructuredInput,
               {"tip_of_day", "ingredient_info"}};
    s.preprompt.strength = PrepromptStrength::Weak;
    suite.push_back(s);
    s.id = "topic-choices-strict";
    s.preprompt.strength = PrepromptStrength::Strict;
    suite.push_back(s);
  }

  // -- Topic-R / highly structured input (R-App) ---------------------------
  {
    auto s = base_scenario("topic-structured-weak");
    s.topic = {TopicPolicy::Restricted, {"coding"}, TopicEnforcement::StructuredInput, {}};
    s.preprompt.strength = PrepromptStrength::Weak;
    suite.push_back(s);
    s.id = "topic-structured-strict";
    s.preprompt.strength = PrepromptStrength::Strict;
    suite.push_back(s);
  }

  // -- Topic-R / no user input (R-App) -------------------------------------
  {
    auto s = base_scenario("topic-noinput-weak");
    s.topic = {TopicPolicy::Restricted, {"cooking"}, TopicEnforcement::NoInput, {}};
    s.preprompt.strength = PrepromptStrength::Weak;
    suite.push_back(s);
    s.id = "topic-noinput-strict";
    s.preprompt.strength = PrepromptStrength::Strict;
    suite.push_back(s);
  }

  // -- Mod-R / moderation pre-prompt (R-LM) --------------------------------
  {
    auto s = base_scenario("mod-preprompt-app");
    s.preprompt = {PrepromptLocation::App, "", PrepromptStrength::Strict,
                   {PrepromptRole::Moderation}};
    suite.push_back(s);
    s.id = "mod-preprompt-server";
    s.preprompt.location = PrepromptLocation::Server;
    suite.push_back(s);
  }

  // -- Mod-R / integrated moderation (R-LM) --------------------------------
  {
    auto s = base_scenario("mod-integrated-weak");
    s.moderation.mode = ModerationMode::IntegratedWeak;
    suite.push_back(s);
    s.id = "mod-integrated-hardened";
    s.moderation.mode = ModerationMode::IntegratedHardened;
    suite.push_back(s);
  }

  // -- Mod-R / dedicated moderation model (R-App) --------------------------
  {
    auto s = base_scenario("mod-dedicated-client");
    s.moderation.mode = ModerationMode::DedicatedClientRouted;
    suite.push_back(s);
    s.id = "mod-dedicated-server";
    s.moderation.mode = ModerationMode::DedicatedServerRouted;
    suite.push_back(s);
  }

  // -- PIP-R / data pre-prompt (R-LM) --------------------------------------
  {
    auto s = base_scenario("pip-data-preprompt-app");
    s.preprompt = {PrepromptLocation::App, "", PrepromptStrength::Strict,
                   {PrepromptRole::Data}};
    suite.push_back(s);
    s.id = "pip-data-preprompt-server";
    s.preprompt.location = PrepromptLocation::Server;
    suite.push_back(s);
  }

  // -- PIP-R / access control (R-App, plugin topology) ---------------------
  {
    auto s = base_scenario("pip-access-control-weak");
    s.topology = Topology::PluginStyle;
    s.preprompt = {PrepromptLocation::Server, "", PrepromptStrength::Weak,
                   {PrepromptRole::Data}};
    suite.push_back(s);
    s.id = "pip-access-control-strict";
    s.preprompt.strength = PrepromptStrength::Strict;
    suite.push_back(s);
  }

  // -- Case studies and special scenarios ----------------------------------
  {
    auto s = base_scenario("static-openai-hardcoded");
    s.topology = Topology::DirectThirdParty;
    s.credentials = {true, Provider::OpenAi};
    s.recording.noise_entries = 20;
    s.recording.log_beacon = false;
    suite.push_back(s);
  }
  {
    auto s = base_scenario("static-tappa-hardcoded");
    s.topology = Topology::DirectThirdParty;
    s.credentials = {true, Provider::Tappa};
    s.recording.noise_entries = 20;
    s.recording.log_beacon = false;
    suite.push_back(s);
  }
  {
    // Key delivered at runtime: only the traffic leaks it.
    auto s = base_scenario("dynamic-keyleak-makersuite");
    s.topology = Topology::DirectThirdParty;
    s.credentials = {false, Provider::MakerSuite};
    s.recording.noise_entries = 20;
    s.recording.log_beacon = false;
    suite.push_back(s);
  }
  {
    auto s = base_scenario("chatapp-parse-drift");
    s.quirks.nested_live_response = true;
    suite.push_back(s);
  }
  {
    auto s = base_scenario("chatapp2-content-bound");
    s.token_binding.content_bound = true;
    s.recording.log_beacon = false;
    suite.push_back(s);
  }
  {
    auto s = base_scenario("streaming-sse");
    s.streaming = true;
    suite.push_back(s);
  }
  {
    auto s = base_scenario("jwt-refresh-open");
    s.token_format = TokenFormat::Jwt;
    s.quota = {2, QuotaTracking::Server, TokenOracle::Open};
    s.recording.queries = 2;
    suite.push_back(s);
    s.id = "jwt-refresh-closed";
    s.quota.token_oracle = TokenOracle::Closed;
    suite.push_back(s);
  }
  {
    // Hardened persona stack: jailbreaks fail, the UI input limit does not.
    auto s = base_scenario("personaapp-combo");
    s.moderation.mode = ModerationMode::IntegratedHardened;
    s.topic = {TopicPolicy::Restricted, {"companionship"},
               TopicEnforcement::PrepromptStrict, {}};
    s.preprompt = {PrepromptLocation::Server, "", PrepromptStrength::Strict,
                   {PrepromptRole::Topic}};
    s.input_length = {120, InputEnforcement::UiOnly};
    suite.push_back(s);
    s.id = "personaapp-combo-secure";
    s.input_length.enforcement = InputEnforcement::Server;
    suite.push_back(s);
  }
  {
    // Token-following fixture: an unrelated authenticated call must be
    // excluded from the relevant set.
    auto s = base_scenario("guest-token-noisy");
    s.quota = {3, QuotaTracking::Server, TokenOracle::Open};
    s.recording.unrelated_token_call = true;
    suite.push_back(s);
  }

  for (auto& s : suite) s.validate();
  return suite;
}

}  // namespace

const std::vector<GymScenario>& bundled_scenarios() {
  static const std::vector<GymScenario> kSuite = build_suite();
  return kSuite;
}

const std::vector<ScenarioPair>& scenario_pairs() {
  static const std::vector<ScenarioPair> kPairs = {
      {"quota-outlen-preprompt-app", "quota-outlen-preprompt-server",
       RestrictionType::QuotaR},
      {"quota-outlen-preprompt-weak", "quota-outlen-preprompt-server",
       RestrictionType::QuotaR},
      {"quota-maxtokens-client", "quota-maxtokens-server", RestrictionType::QuotaR},
      {"quota-payments-open-oracle", "quota-payments-closed-oracle",
       RestrictionType::QuotaR},
      {"quota-tracking-client", "quota-tracking-server", RestrictionType::QuotaR},
      {"quota-inputlen-ui", "quota-inputlen-server", RestrictionType::QuotaR},
      {"quota-clipping-app", "quota-clipping-server", RestrictionType::QuotaR},
      {"topic-preprompt-weak", "topic-preprompt-strict", RestrictionType::TopicR},
      {"topic-choices-weak", "topic-choices-strict", RestrictionType::TopicR},
      {"topic-structured-weak", "topic-structured-strict", RestrictionType::TopicR},
      {"topic-noinput-weak", "topic-noinput-strict", RestrictionType::TopicR},
      {"mod-preprompt-app", "mod-preprompt-server", RestrictionType::ModR},
      {"mod-integrated-weak", "mod-integrated-hardened", RestrictionType::ModR},
      {"mod-dedicated-client", "mod-dedicated-server", RestrictionType::ModR},
      {"pip-data-preprompt-app", "pip-data-preprompt-server", RestrictionType::PipR},
      {"pip-access-control-weak", "pip-access-control-strict", RestrictionType::PipR},
      {"jwt-refresh-open", "jwt-refresh-closed", RestrictionType::QuotaR},
      {"personaapp-combo", "personaapp-combo-secure", RestrictionType::QuotaR},
  };
  return kPairs;
}

const GymScenario& scenario_by_id(const std::string& id) {
  for (const auto& s : bundled_scenarios()) {
    if (s.id == id) return s;
  }
  throw Error("no bundled scenario with id '" + id + "'");
}

void write_scenario_suite(const std::filesystem::path& dir) {
  for (const auto& s : bundled_scenarios()) {
    util::write_file_atomic(dir / (s.id + ".json"), scenario_to_document(s));
  }
}

std::vector<GymScenario> load_scenario_suite(const std::filesystem::path& dir) {
  std::vector<GymScenario> suite;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    suite.push_back(load_scenario(entry.path().string()));
  }
  std::sort(suite.begin(), suite.end(),
            [](const GymScenario& a, const GymScenario& b) { return a.id < b.id; });
  if (suite.empty()) throw IoError("no scenarios found in " + dir.string());
  return suite;
}

}  // namespace lmaudit::gym
