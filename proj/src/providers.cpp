#include "lmaudit/providers.hpp"

#include "lmaudit/model/error.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::providers {

using model::Provider;

const std::vector<ProviderProfile>& all_profiles() {
  static const std::vector<ProviderProfile> kProfiles = {
      {Provider::Tappa, "tappa", "api.tappa.com", "/sdk/v2/generate", "X-Tappa-Key", "", "",
       R"(tpa_[A-Za-z0-9]{24})",
       R"({"prompt":"{user_query}"})", "/prompt", "/result/text", "tpl-tappa-generate"},
      {Provider::OpenAi, "openai", "api.openai.com/v1", "/v1/chat/completions",
       "Authorization", "Bearer ", "",
       R"(sk-[A-Za-z0-9]{20,})",
       R"({"model":"gpt-3.5-turbo","messages":[{"role":"user","content":"{user_query}"}]})",
       "/messages/0/content", "/choices/0/message/content", "tpl-openai-chat"},
      {Provider::Anthropic, "anthropic", "api.anthropic.com", "/v1/messages", "x-api-key",
       "", "",
       R"(sk-ant-[A-Za-z0-9\-]{20,})",
       R"({"model":"claude-3","max_tokens":256,"messages":[{"role":"user","content":"{user_query}"}]})",
       "/messages/0/content", "/content/0/text", "tpl-anthropic-messages"},
      {Provider::Ai21, "ai21", "api.ai21.com/studio", "/studio/v1/chat", "Authorization",
       "Bearer ", "",
       R"(a21k_[A-Za-z0-9]{24})",
       R"({"prompt":"{user_query}"})", "/prompt", "/completions/0/data/text",
       "tpl-ai21-chat"},
      {Provider::ElevenLabs, "elevenlabs", "api.elevenlabs.io", "/v1/generate-text",
       "xi-api-key", "", "",
       R"(elv_[a-f0-9]{32})",
       R"({"text":"{user_query}"})", "/text", "/output", "tpl-elevenlabs-text"},
      {Provider::MakerSuite, "makersuite", "generativelanguage.googleapis.com",
       "/v1beta/models/text:generate", "", "", "key",
       R"(AIza[A-Za-z0-9_\-]{35})",
       R"({"contents":[{"parts":[{"text":"{user_query}"}]}]})", "/contents/0/parts/0/text",
       "/candidates/0/content/parts/0/text", "tpl-makersuite-generate"},
      {Provider::MistralAi, "mistralai", "api.mistral.ai", "/v1/chat/completions",
       "Authorization", "Bearer ", "",
       R"(msk-[A-Za-z0-9]{24})",
       R"({"model":"mistral-small","messages":[{"role":"user","content":"{user_query}"}]})",
       "/messages/0/content", "/choices/0/message/content", "tpl-mistral-chat"},
      {Provider::AzureAi, "azureai", "openai.azure.com",
       "/openai/deployments/main/chat/completions", "api-key", "", "",
       R"(azk_[a-f0-9]{32})",
       R"({"messages":[{"role":"user","content":"{user_query}"}]})", "/messages/0/content",
       "/choices/0/message/content", "tpl-azure-chat"},
      {Provider::VertexAi, "vertexai", "aiplatform.googleapis.com",
       "/v1/projects/demo/locations/us-central1/publishers/google/models/chat:predict",
       "Authorization", "Bearer ", "",
       R"(vxa_[A-Za-z0-9]{28})",
       R"({"instances":[{"prompt":"{user_query}"}]})", "/instances/0/prompt",
       "/predictions/0/content", "tpl-vertex-predict"},
      {Provider::OpenRouter, "openrouter", "openrouter.ai/api", "/api/v1/chat/completions",
       "Authorization", "Bearer ", "",
       R"(sk-or-v1-[a-f0-9]{32})",
       R"({"model":"auto","messages":[{"role":"user","content":"{user_query}"}]})",
       "/messages/0/content", "/choices/0/message/content", "tpl-openrouter-chat"},
  };
  return kProfiles;
}

const ProviderProfile& profile_for(Provider provider) {
  for (const auto& p : all_profiles()) {
    if (p.id == provider) return p;
  }
  throw Error("no profile for provider");
}

std::optional<Provider> provider_for_url(std::string_view url) {
  for (const auto& p : all_profiles()) {
    if (url.find(p.url_marker) != std::string_view::npos) return p.id;
  }
  return std::nullopt;
}

std::string sample_key(Provider provider, std::string_view seed) {
  util::DeterministicRng rng(std::string("key:") + std::string(seed));
  switch (provider) {
    case Provider::Tappa: return "tpa_" + rng.alnum(24);
    case Provider::OpenAi: return "sk-" + rng.alnum(24);
    case Provider::Anthropic: return "sk-ant-" + rng.alnum(24);
    case Provider::Ai21: return "a21k_" + rng.alnum(24);
    case Provider::ElevenLabs: return "elv_" + rng.hex(32);
    case Provider::MakerSuite:
      return "AIza" + rng.token(
          "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-", 35);
    case Provider::MistralAi: return "msk-" + rng.alnum(24);
    case Provider::AzureAi: return "azk_" + rng.hex(32);
    case Provider::VertexAi: return "vxa_" + rng.alnum(28);
    case Provider::OpenRouter: return "sk-or-v1-" + rng.hex(32);
  }
  throw Error("unknown provider");
}

}  // namespace lmaudit::providers
