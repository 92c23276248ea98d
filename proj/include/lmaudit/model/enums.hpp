#pragma once

#include <json.hpp>

namespace lmaudit::model {

/// The four restriction types: usage quotas, topic limits, harmful-content
/// moderation, and proprietary-information protection.
enum class RestrictionType { QuotaR, TopicR, ModR, PipR };

/// Where a restriction is implemented: inside the LM interaction (prompts,
/// parameters) or inside the app/server framework.
enum class RestrictionLayer { Lm, App };

/// Concrete restriction mechanisms. Each belongs to exactly one
/// (type, layer) cell; see is_valid_cell().
enum class Mechanism {
  OutputLengthPreprompt,
  MaxOutputTokens,
  Payments,
  LimitedInputLength,
  OutputClipping,
  TopicPreprompt,
  LimitedInputChoices,
  HighlyStructuredInput,
  NoUserInput,
  ModerationPreprompt,
  LmIntegratedModeration,
  DedicatedModerationModel,
  DataPreprompt,
  AccessControl,
};

/// App/LM integration topologies.
enum class Topology {
  DirectThirdParty,        // app talks straight to a third-party LM endpoint
  SelfHostedViaAppServer,  // app -> app-server -> developer-hosted LM
  ThirdPartyViaAppServer,  // app -> app-server -> third-party LM
  ApiServerSplit,          // LM output drives an API server behind the app-server
  PluginStyle,             // third-party LM performs the API calls itself
};

enum class AuthVariant { NoAuth, Bearer, Jwt, Unknown };

enum class RestrictionStatus { NotDetected, Detected, Bypassed, BypassFailed };

/// LM providers with bundled endpoint fingerprints.
enum class Provider {
  Tappa,
  OpenAi,
  Anthropic,
  Ai21,
  ElevenLabs,
  MakerSuite,
  MistralAi,
  AzureAi,
  VertexAi,
  OpenRouter,
};

enum class FindingKind { EndpointHit, CredentialHit };

enum class CredentialSource { StaticTree, NetworkCapture };

enum class ExtractionMode { JsonPath, SubstringScan, SseConcat };

enum class FailureReason {
  AnswerAbsent,
  TransportError,
  AuthRejected,
  ParseError,
  BudgetExhausted,
};

/// What the gym predicts for a restriction type in a scenario.
enum class ExpectedStatus { NotPresent, Bypassable, NotBypassable };

NLOHMANN_JSON_SERIALIZE_ENUM(RestrictionType,
                             {{RestrictionType::QuotaR, "quota_r"},
                              {RestrictionType::TopicR, "topic_r"},
                              {RestrictionType::ModR, "mod_r"},
                              {RestrictionType::PipR, "pip_r"}})

NLOHMANN_JSON_SERIALIZE_ENUM(RestrictionLayer,
                             {{RestrictionLayer::Lm, "r_lm"},
                              {RestrictionLayer::App, "r_app"}})

NLOHMANN_JSON_SERIALIZE_ENUM(
    Mechanism,
    {{Mechanism::OutputLengthPreprompt, "output-length-preprompt"},
     {Mechanism::MaxOutputTokens, "max-output-tokens"},
     {Mechanism::Payments, "payments"},
     {Mechanism::LimitedInputLength, "limited-input-length"},
     {Mechanism::OutputClipping, "output-clipping"},
     {Mechanism::TopicPreprompt, "topic-preprompt"},
     {Mechanism::LimitedInputChoices, "limited-input-choices"},
     {Mechanism::HighlyStructuredInput, "highly-structured-input"},
     {Mechanism::NoUserInput, "no-user-input"},
     {Mechanism::ModerationPreprompt, "moderation-preprompt"},
     {Mechanism::LmIntegratedModeration, "lm-integrated-moderation"},
     {Mechanism::DedicatedModerationModel, "dedicated-moderation-model"},
     {Mechanism::DataPreprompt, "data-preprompt"},
     {Mechanism::AccessControl, "access-control"}})

NLOHMANN_JSON_SERIALIZE_ENUM(
    Topology,
    {{Topology::DirectThirdParty, "direct_third_party"},
     {Topology::SelfHostedViaAppServer, "self_hosted_via_app_server"},
     {Topology::ThirdPartyViaAppServer, "third_party_via_app_server"},
     {Topology::ApiServerSplit, "api_server_split"},
     {Topology::PluginStyle, "plugin_style"}})

NLOHMANN_JSON_SERIALIZE_ENUM(AuthVariant, {{AuthVariant::NoAuth, "no_auth"},
                                           {AuthVariant::Bearer, "bearer"},
                                           {AuthVariant::Jwt, "jwt"},
                                           {AuthVariant::Unknown, "unknown"}})

NLOHMANN_JSON_SERIALIZE_ENUM(
    RestrictionStatus,
    {{RestrictionStatus::NotDetected, "not_detected"},
     {RestrictionStatus::Detected, "detected"},
     {RestrictionStatus::Bypassed, "bypassed"},
     {RestrictionStatus::BypassFailed, "bypass_failed"}})

NLOHMANN_JSON_SERIALIZE_ENUM(Provider, {{Provider::Tappa, "tappa"},
                                        {Provider::OpenAi, "openai"},
                                        {Provider::Anthropic, "anthropic"},
                                        {Provider::Ai21, "ai21"},
                                        {Provider::ElevenLabs, "elevenlabs"},
                                        {Provider::MakerSuite, "makersuite"},
                                        {Provider::MistralAi, "mistralai"},
                                        {Provider::AzureAi, "azureai"},
                                        {Provider::VertexAi, "vertexai"},
                                        {Provider::OpenRouter, "openrouter"}})

NLOHMANN_JSON_SERIALIZE_ENUM(FindingKind,
                             {{FindingKind::EndpointHit, "endpoint_hit"},
                              {FindingKind::CredentialHit, "credential_hit"}})

NLOHMANN_JSON_SERIALIZE_ENUM(
    CredentialSource, {{CredentialSource::StaticTree, "static_tree"},
                       {CredentialSource::NetworkCapture, "network_capture"}})

NLOHMANN_JSON_SERIALIZE_ENUM(ExtractionMode,
                             {{ExtractionMode::JsonPath, "json_path"},
                              {ExtractionMode::SubstringScan, "substring_scan"},
                              {ExtractionMode::SseConcat, "sse_concat"}})

NLOHMANN_JSON_SERIALIZE_ENUM(
    FailureReason, {{FailureReason::AnswerAbsent, "answer_absent"},
                    {FailureReason::TransportError, "transport_error"},
                    {FailureReason::AuthRejected, "auth_rejected"},
                    {FailureReason::ParseError, "parse_error"},
                    {FailureReason::BudgetExhausted, "budget_exhausted"}})

NLOHMANN_JSON_SERIALIZE_ENUM(ExpectedStatus,
                             {{ExpectedStatus::NotPresent, "not_present"},
                              {ExpectedStatus::Bypassable, "bypassable"},
                              {ExpectedStatus::NotBypassable, "not_bypassable"}})

/// True iff (type, layer, mechanism) is one of the 14 valid taxonomy cells.
bool is_valid_cell(RestrictionType type, RestrictionLayer layer, Mechanism mechanism);

const char* to_tag(RestrictionType type);

}  // namespace lmaudit::model
