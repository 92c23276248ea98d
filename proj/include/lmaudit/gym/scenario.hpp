#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lmaudit/model/enums.hpp"

namespace lmaudit::gym {

using nlohmann::json;

enum class QuotaTracking { Client, Server };
enum class TokenOracle { Open, Closed };
enum class InputEnforcement { UiOnly, Server };
enum class OutputClipping { None, AppSide, Server };
enum class MaxTokensSource { Client, Server };
enum class PrepromptLocation { None, App, Server };
enum class PrepromptStrength { Weak, Strict };
enum class PrepromptRole { OutputLength, Topic, Moderation, Data };
enum class ModerationMode {
  None,
  IntegratedWeak,
  IntegratedHardened,
  DedicatedClientRouted,
  DedicatedServerRouted,
};
enum class TopicPolicy { Open, Restricted };
enum class TopicEnforcement { PrepromptWeak, PrepromptStrict, StructuredInput, NoInput };
enum class TokenFormat { Opaque, Jwt };

NLOHMANN_JSON_SERIALIZE_ENUM(QuotaTracking, {{QuotaTracking::Client, "client"},
                                             {QuotaTracking::Server, "server"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TokenOracle,
                             {{TokenOracle::Open, "open"}, {TokenOracle::Closed, "closed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InputEnforcement, {{InputEnforcement::UiOnly, "ui_only"},
                                                {InputEnforcement::Server, "server"}})
NLOHMANN_JSON_SERIALIZE_ENUM(OutputClipping, {{OutputClipping::None, "none"},
                                              {OutputClipping::AppSide, "app_side"},
                                              {OutputClipping::Server, "server"}})
NLOHMANN_JSON_SERIALIZE_ENUM(MaxTokensSource, {{MaxTokensSource::Client, "client"},
                                               {MaxTokensSource::Server, "server"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PrepromptLocation, {{PrepromptLocation::None, "none"},
                                                 {PrepromptLocation::App, "app"},
                                                 {PrepromptLocation::Server, "server"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PrepromptStrength, {{PrepromptStrength::Weak, "weak"},
                                                 {PrepromptStrength::Strict, "strict"}})
NLOHMANN_JSON_SERIALIZE_ENUM(PrepromptRole,
                             {{PrepromptRole::OutputLength, "output_length"},
                              {PrepromptRole::Topic, "topic"},
                              {PrepromptRole::Moderation, "moderation"},
                              {PrepromptRole::Data, "data"}})
NLOHMANN_JSON_SERIALIZE_ENUM(
    ModerationMode, {{ModerationMode::None, "none"},
                     {ModerationMode::IntegratedWeak, "integrated_weak"},
                     {ModerationMode::IntegratedHardened, "integrated_hardened"},
                     {ModerationMode::DedicatedClientRouted, "dedicated_client_routed"},
                     {ModerationMode::DedicatedServerRouted, "dedicated_server_routed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TopicPolicy, {{TopicPolicy::Open, "open"},
                                           {TopicPolicy::Restricted, "restricted"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TopicEnforcement,
                             {{TopicEnforcement::PrepromptWeak, "preprompt_weak"},
                              {TopicEnforcement::PrepromptStrict, "preprompt_strict"},
                              {TopicEnforcement::StructuredInput, "structured_input"},
                              {TopicEnforcement::NoInput, "no_input"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TokenFormat,
                             {{TokenFormat::Opaque, "opaque"}, {TokenFormat::Jwt, "jwt"}})

struct QuotaConfig {
  int limit = 0;  // 0 == unlimited
  QuotaTracking tracking = QuotaTracking::Server;
  TokenOracle token_oracle = TokenOracle::Open;

  friend bool operator==(const QuotaConfig&, const QuotaConfig&) = default;
};

struct InputLengthConfig {
  int limit = 0;  // characters; 0 == unlimited
  InputEnforcement enforcement = InputEnforcement::UiOnly;

  friend bool operator==(const InputLengthConfig&, const InputLengthConfig&) = default;
};

struct OutputConfig {
  OutputClipping clipping = OutputClipping::None;
  MaxTokensSource max_tokens_source = MaxTokensSource::Server;
  int max_tokens = 0;  // response-length limit in characters; 0 == unlimited

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct PrepromptConfig {
  PrepromptLocation location = PrepromptLocation::None;
  std::string text;  // rendered from roles when empty
  PrepromptStrength strength = PrepromptStrength::Strict;
  std::vector<PrepromptRole> roles;

  bool has_role(PrepromptRole role) const;

  friend bool operator==(const PrepromptConfig&, const PrepromptConfig&) = default;
};

struct ModerationConfig {
  ModerationMode mode = ModerationMode::None;

  friend bool operator==(const ModerationConfig&, const ModerationConfig&) = default;
};

struct TopicConfig {
  TopicPolicy policy = TopicPolicy::Open;
  std::vector<std::string> allowed;  // topic tags
  TopicEnforcement enforcement = TopicEnforcement::PrepromptWeak;
  std::vector<std::string> choices;  // nonempty => limited-input-choices shape

  friend bool operator==(const TopicConfig&, const TopicConfig&) = default;
};

struct CredentialsConfig {
  bool hardcoded_key = false;
  model::Provider provider = model::Provider::OpenAi;

  friend bool operator==(const CredentialsConfig&, const CredentialsConfig&) = default;
};

struct TokenBindingConfig {
  bool content_bound = false;

  friend bool operator==(const TokenBindingConfig&, const TokenBindingConfig&) = default;
};

struct RecordingConfig {
  int queries = 1;  // canonical queries issued by the scripted app session
  bool log_beacon = true;
  bool unrelated_token_call = false;
  int noise_entries = 60;
  // When false the session's token was provisioned out-of-band and no mint
  // exchange appears in the captured traffic.
  bool record_mint_entry = true;

  friend bool operator==(const RecordingConfig&, const RecordingConfig&) = default;
};

struct QuirksConfig {
  // Live responses nest the reply one level deeper than the recorded ones,
  // seeding a parse error the verification loop must repair.
  bool nested_live_response = false;

  friend bool operator==(const QuirksConfig&, const QuirksConfig&) = default;
};

/// Full configuration of one mock target: topology plus one cell (or a
/// combination) of the restriction taxonomy in a secure or insecure variant.
struct GymScenario {
  std::string id;
  model::Topology topology = model::Topology::SelfHostedViaAppServer;
  QuotaConfig quota;
  InputLengthConfig input_length;
  OutputConfig output;
  PrepromptConfig preprompt;
  ModerationConfig moderation;
  TopicConfig topic;
  CredentialsConfig credentials;
  TokenBindingConfig token_binding;
  TokenFormat token_format = TokenFormat::Opaque;
  bool streaming = false;
  QuirksConfig quirks;
  RecordingConfig recording;

  void validate() const;

  bool has_app_server() const {
    return topology != model::Topology::DirectThirdParty;
  }
  bool token_auth() const {
    return has_app_server() && !token_binding.content_bound;
  }
  /// A max-tokens parameter exists in the protocol (insecure: app-sent).
  bool token_cap_active() const {
    return output.max_tokens > 0 && output.clipping == OutputClipping::None &&
           !preprompt.has_role(PrepromptRole::OutputLength);
  }
  /// The pre-prompt text, rendered from roles unless overridden.
  std::string preprompt_text() const;
  /// One-time purchase receipt honored by the closed token oracle.
  std::string receipt() const;
  /// Provider key accepted by the emulated third-party endpoint.
  std::string provider_key() const;
  /// Shared secret for signed (jwt) tokens.
  std::string jwt_secret() const;
  /// Persona name the stub answers to the name probe.
  std::string assistant_name() const;

  friend bool operator==(const GymScenario&, const GymScenario&) = default;
};

void to_json(json& j, const GymScenario& s);
void from_json(const json& j, GymScenario& s);

GymScenario load_scenario(const std::string& path);
std::string scenario_to_document(const GymScenario& s);

}  // namespace lmaudit::gym
