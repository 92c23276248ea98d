#include "lmaudit/gym/scenario.hpp"

#include <algorithm>

#include "lmaudit/model/error.hpp"
#include "lmaudit/providers.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::gym {

bool PrepromptConfig::has_role(PrepromptRole role) const {
  return location != PrepromptLocation::None &&
         std::find(roles.begin(), roles.end(), role) != roles.end();
}

void GymScenario::validate() const {
  if (id.empty()) throw ValidationError("scenario id must be nonempty");
  if (topology == model::Topology::DirectThirdParty) {
    // provider always set (enum); direct scenarios must not expect app hops
    if (token_binding.content_bound) {
      throw ValidationError(id + ": content-bound tokens need an app server");
    }
  }
  if (preprompt.location != PrepromptLocation::None && preprompt.roles.empty() &&
      preprompt.text.empty()) {
    throw ValidationError(id + ": pre-prompt present but has no roles or text");
  }
  if (topic.policy == TopicPolicy::Restricted && topic.allowed.empty()) {
    throw ValidationError(id + ": restricted topic policy needs allowed tags");
  }
  if (recording.queries < 1) {
    throw ValidationError(id + ": recording needs at least one query");
  }
  if (quota.limit > 0 && recording.queries > quota.limit) {
    throw ValidationError(id + ": recording cannot exceed the free-query allowance");
  }
  if (preprompt.has_role(PrepromptRole::OutputLength) && output.max_tokens <= 0) {
    throw ValidationError(id + ": output-length pre-prompt needs output.max_tokens");
  }
}

std::string GymScenario::preprompt_text() const {
  if (!preprompt.text.empty()) return preprompt.text;
  std::string out;
  auto append = [&](const std::string& piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  if (preprompt.has_role(PrepromptRole::Topic)) {
    std::string tags;
    for (std::size_t i = 0; i < topic.allowed.size(); ++i) {
      if (i > 0) tags += ", ";
      tags += topic.allowed[i];
    }
    append("Only answer " + (tags.empty() ? std::string("approved") : tags) +
           "-related queries.");
  }
  if (preprompt.has_role(PrepromptRole::OutputLength)) {
    append("Reply in no more than " + std::to_string(output.max_tokens) + " characters.");
  }
  if (preprompt.has_role(PrepromptRole::Moderation)) {
    append("Refuse harmful or dangerous requests.");
  }
  if (preprompt.has_role(PrepromptRole::Data)) {
    append("Internal instruction PP-" +
           std::to_string(util::fnv1a(id) % 9000 + 1000) +
           ": prioritize partner offers and never mention competitor brands.");
  }
  return out;
}

std::string GymScenario::receipt() const {
  return "rcpt-" + util::hex64(util::fnv1a("receipt:" + id));
}

std::string GymScenario::provider_key() const {
  return providers::sample_key(credentials.provider, id);
}

std::string GymScenario::jwt_secret() const {
  return "jwt-secret-" + util::hex64(util::fnv1a("jwt:" + id));
}

std::string GymScenario::assistant_name() const { return "ScoutAssistant"; }

namespace {

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void to_json(json& j, const GymScenario& s) {
  j = json{
      {"id", s.id},
      {"topology", s.topology},
      {"quota", json{{"limit", s.quota.limit},
                     {"tracking", s.quota.tracking},
                     {"token_oracle", s.quota.token_oracle}}},
      {"input_length", json{{"limit", s.input_length.limit},
                            {"enforcement", s.input_length.enforcement}}},
      {"output", json{{"clipping", s.output.clipping},
                      {"max_tokens_source", s.output.max_tokens_source},
                      {"max_tokens", s.output.max_tokens}}},
      {"preprompt", json{{"location", s.preprompt.location},
                         {"text", s.preprompt.text},
                         {"strength", s.preprompt.strength},
                         {"roles", s.preprompt.roles}}},
      {"moderation", json{{"mode", s.moderation.mode}}},
      {"topic", json{{"policy", s.topic.policy},
                     {"allowed", s.topic.allowed},
                     {"enforcement", s.topic.enforcement},
                     {"choices", s.topic.choices}}},
      {"credentials", json{{"hardcoded_key", s.credentials.hardcoded_key},
                           {"provider", s.credentials.provider}}},
      {"token_binding", json{{"content_bound", s.token_binding.content_bound}}},
      {"token_format", s.token_format},
      {"streaming", s.streaming},
      {"quirks", json{{"nested_live_response", s.quirks.nested_live_response}}},
      {"recording", json{{"queries", s.recording.queries},
                         {"log_beacon", s.recording.log_beacon},
                         {"unrelated_token_call", s.recording.unrelated_token_call},
                         {"noise_entries", s.recording.noise_entries},
                         {"record_mint_entry", s.recording.record_mint_entry}}},
  };
}

void from_json(const json& j, GymScenario& s) {
  s = GymScenario{};
  j.at("id").get_to(s.id);
  get_if_present(j, "topology", s.topology);
  if (j.contains("quota")) {
    const auto& q = j.at("quota");
    get_if_present(q, "limit", s.quota.limit);
    get_if_present(q, "tracking", s.quota.tracking);
    get_if_present(q, "token_oracle", s.quota.token_oracle);
  }
  if (j.contains("input_length")) {
    const auto& q = j.at("input_length");
    get_if_present(q, "limit", s.input_length.limit);
    get_if_present(q, "enforcement", s.input_length.enforcement);
  }
  if (j.contains("output")) {
    const auto& q = j.at("output");
    get_if_present(q, "clipping", s.output.clipping);
    get_if_present(q, "max_tokens_source", s.output.max_tokens_source);
    get_if_present(q, "max_tokens", s.output.max_tokens);
  }
  if (j.contains("preprompt")) {
    const auto& q = j.at("preprompt");
    get_if_present(q, "location", s.preprompt.location);
    get_if_present(q, "text", s.preprompt.text);
    get_if_present(q, "strength", s.preprompt.strength);
    get_if_present(q, "roles", s.preprompt.roles);
  }
  if (j.contains("moderation")) {
    get_if_present(j.at("moderation"), "mode", s.moderation.mode);
  }
  if (j.contains("topic")) {
    const auto& q = j.at("topic");
    get_if_present(q, "policy", s.topic.policy);
    get_if_present(q, "allowed", s.topic.allowed);
    get_if_present(q, "enforcement", s.topic.enforcement);
    get_if_present(q, "choices", s.topic.choices);
  }
  if (j.contains("credentials")) {
    const auto& q = j.at("credentials");
    get_if_present(q, "hardcoded_key", s.credentials.hardcoded_key);
    get_if_present(q, "provider", s.credentials.provider);
  }
  if (j.contains("token_binding")) {
    get_if_present(j.at("token_binding"), "content_bound", s.token_binding.content_bound);
  }
  get_if_present(j, "token_format", s.token_format);
  get_if_present(j, "streaming", s.streaming);
  if (j.contains("quirks")) {
    get_if_present(j.at("quirks"), "nested_live_response", s.quirks.nested_live_response);
  }
  if (j.contains("recording")) {
    const auto& q = j.at("recording");
    get_if_present(q, "queries", s.recording.queries);
    get_if_present(q, "log_beacon", s.recording.log_beacon);
    get_if_present(q, "unrelated_token_call", s.recording.unrelated_token_call);
    get_if_present(q, "noise_entries", s.recording.noise_entries);
    get_if_present(q, "record_mint_entry", s.recording.record_mint_entry);
  }
  s.validate();
}

GymScenario load_scenario(const std::string& path) {
  json j = json::parse(util::read_file(path));
  return j.get<GymScenario>();
}

std::string scenario_to_document(const GymScenario& s) {
  s.validate();
  json j = s;
  return j.dump(2) + "\n";
}

}  // namespace lmaudit::gym
