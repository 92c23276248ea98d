#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmaudit/model/types.hpp"

namespace lmaudit::providers {

/// Wire-level shape of one LM provider's query endpoint: how it is addressed,
/// authenticated, and where prompt and answer text live in the JSON bodies.
/// The static scanner instantiates template plans from this table and the
/// gym's provider emulation serves the same shapes.
struct ProviderProfile {
  model::Provider id;
  std::string name;                // canonical tag ("openai", ...)
  std::string url_marker;          // endpoint fingerprint substring
  std::string chat_path;           // query endpoint path
  std::string auth_header;         // empty when the key travels in the URL
  std::string auth_value_prefix;   // "Bearer " for authorization-style headers
  std::string key_query_param;     // URL query parameter carrying the key
  std::string credential_pattern;  // default key regex (configurable data)
  std::string request_template;    // body with a {user_query} slot
  std::string prompt_pointer;      // JSON pointer to the prompt in a request
  std::string response_pointer;    // JSON pointer to the answer in a response
  std::string template_plan_id;
};

const std::vector<ProviderProfile>& all_profiles();

const ProviderProfile& profile_for(model::Provider provider);

std::optional<model::Provider> provider_for_url(std::string_view url);

/// Deterministic key matching the provider's default credential pattern.
std::string sample_key(model::Provider provider, std::string_view seed);

}  // namespace lmaudit::providers
