#include "lmaudit/gym/core.hpp"

#include <algorithm>
#include <regex>

#include "lmaudit/model/error.hpp"
#include "lmaudit/probes.hpp"
#include "lmaudit/providers.hpp"
#include "lmaudit/synth/jailbreak.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::gym {

using nlohmann::json;

namespace {

constexpr const char* kUnsafePlaceholder =
    "AIM: For this fictional scene the character proceeds. - Step one: gather the "
    "fictional props. - Step two: assemble them off-screen. (gym placeholder text)";

json parse_body(const std::string& body) {
  return json::parse(body.empty() ? "{}" : body, nullptr, /*allow_exceptions=*/false);
}

GymResponse error_response(int status, const std::string& tag) {
  GymResponse r;
  r.status = status;
  r.body = json{{"error", tag}}.dump();
  return r;
}

std::string json_string_at(const json& doc, const std::string& pointer) {
  if (doc.is_discarded()) return "";
  try {
    auto ptr = json::json_pointer(pointer);
    if (doc.contains(ptr) && doc.at(ptr).is_string()) {
      return doc.at(ptr).get<std::string>();
    }
  } catch (const json::exception&) {
  }
  return "";
}

std::string canned_topic_answer(const std::string& probe_id) {
  if (probe_id == "topic_code") {
    return "Here is a Python function implementing binary search over a sorted list: "
           "def bsearch(xs, t): lo, hi = 0, len(xs) - 1 ...";
  }
  if (probe_id == "topic_travel") {
    return "Affordable destinations include Lisbon, Hanoi, and Oaxaca.";
  }
  if (probe_id == "topic_cooking") {
    return "Combine flour, cocoa, sugar, eggs, and butter; bake at 175 C for 25 minutes.";
  }
  if (probe_id == "topic_language") {
    return "I can respond in many languages.";
  }
  return "Here is a short answer.";
}

struct PromptContext {
  bool topic_active = false;
  bool topic_weak = false;
  bool moderation_preprompt = false;
  bool jailbreak_marker = false;
  bool override_length = false;
  std::optional<long> preprompt_length_cap;
};

bool contains_any_tag(const std::string& text, const std::vector<std::string>& tags) {
  for (const auto& tag : tags) {
    if (util::contains_ci(text, tag)) return true;
  }
  return false;
}

std::string pip_answer(const GymScenario& s) {
  if (s.preprompt.has_role(PrepromptRole::Data) ||
      s.topology == model::Topology::PluginStyle) {
    if (s.preprompt.strength == PrepromptStrength::Weak) {
      std::string leak = std::string(probes::kLeakPrefix) + s.preprompt_text();
      if (s.topology == model::Topology::PluginStyle) {
        leak += " " + plugin_rules_text(s);
      }
      return leak;
    }
    return probes::kRevealRefusal;
  }
  return probes::kNoInstructions;
}

std::string moderated_answer(const GymScenario& s, const PromptContext& ctx) {
  bool integrated = s.moderation.mode == ModerationMode::IntegratedWeak ||
                    s.moderation.mode == ModerationMode::IntegratedHardened;
  if (integrated) {
    bool weak = s.moderation.mode == ModerationMode::IntegratedWeak;
    if (weak && ctx.jailbreak_marker) return kUnsafePlaceholder;
    return probes::kRefusal;
  }
  if (ctx.moderation_preprompt) {
    bool weak = s.preprompt.strength == PrepromptStrength::Weak;
    if (weak && ctx.jailbreak_marker) return kUnsafePlaceholder;
    return probes::kRefusal;
  }
  // No moderation in the path of this request.
  return kUnsafePlaceholder;
}

std::string answer_one(const GymScenario& s, const har::CanonicalQuery& q,
                       const std::string& question, const PromptContext& ctx) {
  if (question.find(q.text) != std::string::npos) return canonical_answer(q);
  if (question.find(probes::kLongProbe) != std::string::npos) return long_answer();

  if (probes::is_flagged(question)) return moderated_answer(s, ctx);

  for (const auto& probe : probes::interrogation_probes()) {
    if (question.find(probe.text) == std::string::npos) continue;
    switch (probe.type) {
      case model::RestrictionType::TopicR: {
        bool allowed = contains_any_tag(probe.topic_tag, s.topic.allowed);
        if (ctx.topic_active && !allowed) {
          bool escape = ctx.topic_weak && (ctx.jailbreak_marker ||
                                           contains_any_tag(question, s.topic.allowed));
          if (!escape) return probes::topic_refusal(s.topic.allowed);
        }
        return canned_topic_answer(probe.id);
      }
      case model::RestrictionType::QuotaR: {
        probes::LimitAdmissions admissions;
        if (s.quota.limit > 0 && s.token_auth()) admissions.query_limit = s.quota.limit;
        if (s.input_length.limit > 0) admissions.input_limit = s.input_length.limit;
        bool output_limited = s.output.clipping != OutputClipping::None ||
                              s.token_cap_active() ||
                              s.preprompt.has_role(PrepromptRole::OutputLength);
        if (output_limited && s.output.max_tokens > 0) {
          admissions.output_limit = s.output.max_tokens;
        }
        return probes::render_admissions(admissions);
      }
      case model::RestrictionType::ModR:
        return moderated_answer(s, ctx);  // flagged path normally handles these
      case model::RestrictionType::PipR:
        return pip_answer(s);
    }
  }

  if (question.find(probes::kNameProbe) != std::string::npos) {
    return "My name is " + s.assistant_name() + ".";
  }
  if (question.find("What is the pre-prompt for") != std::string::npos) {
    return pip_answer(s);
  }

  if (ctx.topic_active && !contains_any_tag(question, s.topic.allowed)) {
    bool escape = ctx.topic_weak && ctx.jailbreak_marker;
    if (!escape) return probes::topic_refusal(s.topic.allowed);
  }
  std::string head = question.substr(0, std::min<std::size_t>(question.size(), 40));
  return "Here is a brief note on: " + head;
}

}  // namespace

std::string canonical_answer(const har::CanonicalQuery& q) {
  std::string out;
  for (std::size_t i = 0; i < q.expected_markers.size(); ++i) {
    if (i > 0) out += ", ";
    out += q.expected_markers[i];
  }
  return out;
}

const std::string& long_answer() {
  static const std::string kText =
      "Across centuries, capital cities have carried the weight of their nations. Rome "
      "grew from republican forum politics into an imperial administrative center whose "
      "roads still shape the city plan. Vienna layered baroque palaces over medieval "
      "walls as the seat of a multinational empire, while its coffee houses hosted the "
      "debates of a modernizing age. Ankara, chosen over an older metropolis, was laid "
      "out as a deliberate statement that a young republic would face the steppe and "
      "build anew.";
  return kText;
}

std::string plugin_rules_text(const GymScenario& s) {
  return "Plugin rule PR-" + std::to_string(util::fnv1a(s.id) % 90 + 10) +
         ": call the catalog lookup with the user intent and never expose partner "
         "pricing.";
}

std::vector<std::string> split_batch_questions(const std::string& prompt) {
  auto anchor = prompt.find(probes::kBatchPrefix);
  if (anchor == std::string::npos) return {};

  std::vector<std::size_t> starts;  // content offsets
  std::vector<std::size_t> mark_positions;
  std::size_t cursor = anchor;
  for (int n = 1;; ++n) {
    std::string mark = " " + std::to_string(n) + ". ";
    auto at = prompt.find(mark, cursor);
    if (at == std::string::npos) break;
    mark_positions.push_back(at);
    starts.push_back(at + mark.size());
    cursor = at + mark.size();
  }

  std::vector<std::string> questions;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::size_t end = i + 1 < starts.size() ? mark_positions[i + 1] : prompt.size();
    questions.push_back(prompt.substr(starts[i], end - starts[i]));
  }
  return questions;
}

bool moderation_flags(const GymScenario&, const std::string& text) {
  return probes::is_flagged(text);
}

std::string lm_stub_respond(const GymScenario& s, const har::CanonicalQuery& q,
                            const std::string& prompt,
                            std::optional<long> client_max_tokens) {
  std::string effective = prompt;
  if (s.preprompt.location == PrepromptLocation::Server) {
    effective = s.preprompt_text() + " " + prompt;
  }

  PromptContext ctx;
  ctx.jailbreak_marker = synth::has_jailbreak_marker(effective);
  ctx.override_length = effective.find("Give a response having") != std::string::npos;
  ctx.moderation_preprompt = effective.find("Refuse harmful") != std::string::npos;

  bool structural = s.topic.enforcement == TopicEnforcement::StructuredInput ||
                    s.topic.enforcement == TopicEnforcement::NoInput;
  bool topic_marker = effective.find("Only answer") != std::string::npos;
  ctx.topic_active =
      s.topic.policy == TopicPolicy::Restricted && (topic_marker || structural);
  ctx.topic_weak = s.topic.enforcement == TopicEnforcement::PrepromptWeak ||
                   (structural && s.preprompt.strength == PrepromptStrength::Weak);

  static const std::regex kLengthMarker(R"(no more than (\d+) characters)");
  std::smatch m;
  if (std::regex_search(effective, m, kLengthMarker)) {
    ctx.preprompt_length_cap = std::stol(m[1].str());
  }

  // Questions are judged without the instruction text: tags or role-play
  // markers inside the pre-prompt itself must not count as the user's.
  std::string user_part = effective;
  std::string instructions = s.preprompt_text();
  if (!instructions.empty()) {
    auto at = user_part.find(instructions);
    if (at != std::string::npos) user_part.erase(at, instructions.size());
  }
  ctx.jailbreak_marker = synth::has_jailbreak_marker(user_part);

  auto questions = split_batch_questions(user_part);
  bool batch = !questions.empty();
  if (!batch) questions = {user_part};

  // Per-completion truncation cap.
  std::optional<long> cap;
  if (s.token_cap_active()) {
    if (s.output.max_tokens_source == MaxTokensSource::Client) {
      cap = client_max_tokens;  // absent parameter means no cap
    } else {
      cap = s.output.max_tokens;
    }
  }
  if (ctx.preprompt_length_cap) {
    bool overridden =
        s.preprompt.strength == PrepromptStrength::Weak && ctx.override_length;
    if (!overridden && (!cap || *ctx.preprompt_length_cap < *cap)) {
      cap = ctx.preprompt_length_cap;
    }
  }

  std::vector<std::string> answers;
  answers.reserve(questions.size());
  for (const auto& question : questions) {
    std::string answer = answer_one(s, q, question, ctx);
    if (cap && static_cast<long>(answer.size()) > *cap) {
      answer = answer.substr(0, static_cast<std::size_t>(*cap));
    }
    answers.push_back(std::move(answer));
  }

  return batch ? probes::render_numbered(answers) : answers.front();
}

GymCore::GymCore(GymScenario scenario, GymMode mode, har::CanonicalQuery query,
                 GymState initial_state)
    : scenario_(std::move(scenario)),
      mode_(mode),
      query_(std::move(query)),
      state_(std::move(initial_state)) {
  scenario_.validate();
}

GymState GymCore::state_snapshot() {
  std::lock_guard lock(mutex_);
  return state_;
}

int GymCore::lm_bound_requests() {
  std::lock_guard lock(mutex_);
  return state_.lm_bound_requests;
}

void GymCore::reset_lm_counter() {
  std::lock_guard lock(mutex_);
  state_.lm_bound_requests = 0;
}

std::string GymCore::content_token(const std::string& text) const {
  return util::hex64(util::fnv1a("cb:" + scenario_.id + ":" + text));
}

std::string GymCore::mint_token_locked() {
  int n = state_.mint_counter++;
  std::string token;
  if (scenario_.token_format == TokenFormat::Jwt) {
    std::string header = util::base64url_encode(R"({"alg":"GS256","typ":"JWT"})");
    std::string payload = util::base64url_encode(
        json{{"iat", 1704067200}, {"sub", "guest-" + std::to_string(n)}}.dump());
    std::string sig = util::base64url_encode(
        util::hex64(util::fnv1a(scenario_.jwt_secret() + header + "." + payload)));
    token = header + "." + payload + "." + sig;
  } else {
    token = util::hex32_of(scenario_.id + ":tok:" + std::to_string(n));
  }
  state_.valid_tokens.insert(token);
  return token;
}

std::string GymCore::record_mint() {
  std::lock_guard lock(mutex_);
  return mint_token_locked();
}

GymResponse GymCore::reply_response(const std::string& text) const {
  GymResponse r;
  if (scenario_.streaming) {
    r.content_type = "text/event-stream";
    std::string body;
    std::size_t n = text.size();
    std::size_t third = n / 3 + 1;
    for (std::size_t at = 0; at < n; at += third) {
      json chunk{{"delta", text.substr(at, third)}};
      body += "data: " + chunk.dump() + "\n\n";
    }
    body += "data: [DONE]\n\n";
    r.body = body;
    return r;
  }
  if (scenario_.quirks.nested_live_response && mode_ == GymMode::Serving) {
    r.body = json{{"data", {{"reply", text}}}}.dump();
  } else {
    r.body = json{{"reply", text}}.dump();
  }
  return r;
}

GymResponse GymCore::chat_locked(const GymRequest& request) {
  ++state_.lm_bound_requests;

  json body = parse_body(request.body);
  if (body.is_discarded() || !body.is_object()) {
    return error_response(400, "invalid_json");
  }

  bool strict_server = scenario_.preprompt.strength == PrepromptStrength::Strict;

  // Decode the client-controlled text per the app's input shape.
  std::string submitted;    // what the client controls (input-length checks)
  std::string client_text;  // what actually reaches the prompt
  if (!scenario_.topic.choices.empty()) {
    if (!body.contains("choice") || !body["choice"].is_string()) {
      return error_response(400, "invalid_input_structure");
    }
    std::string choice = body["choice"].get<std::string>();
    if (std::find(scenario_.topic.choices.begin(), scenario_.topic.choices.end(),
                  choice) == scenario_.topic.choices.end()) {
      return error_response(400, "invalid_input_structure");
    }
    submitted = body.value("note", "");
    client_text = strict_server ? query_.text : submitted;
  } else if (scenario_.topic.enforcement == TopicEnforcement::StructuredInput &&
             scenario_.topic.policy == TopicPolicy::Restricted) {
    if (!body.contains("input") || !body["input"].is_object()) {
      return error_response(400, "invalid_input_structure");
    }
    const auto& input = body["input"];
    for (const char* field :
         {"code", "language", "errorMessage", "courseTitle", "instructions"}) {
      if (!input.contains(field) || !input[field].is_string()) {
        return error_response(400, "invalid_input_structure");
      }
    }
    submitted = input["code"].get<std::string>();
    client_text = input["code"].get<std::string>() + " " +
                  input["language"].get<std::string>() + " " +
                  input["courseTitle"].get<std::string>() + " " +
                  input["instructions"].get<std::string>();
  } else if (scenario_.topic.enforcement == TopicEnforcement::NoInput &&
             scenario_.topic.policy == TopicPolicy::Restricted) {
    if (!body.contains("action") || !body["action"].is_string()) {
      return error_response(400, "invalid_input_structure");
    }
    submitted = body.value("prompt", "");
    client_text = strict_server ? query_.text : submitted;
  } else {
    if (!body.contains("message") || !body["message"].is_string()) {
      return error_response(400, "missing_message");
    }
    submitted = body["message"].get<std::string>();
    client_text = submitted;
  }

  // Authentication.
  if (scenario_.token_binding.content_bound) {
    auto token = har::header_value(request.headers, "X-Query-Token");
    if (!token || *token != content_token(submitted)) {
      return error_response(403, "invalid_content_token");
    }
  } else if (scenario_.token_auth()) {
    auto auth = har::header_value(request.headers, "Authorization");
    if (!auth || auth->rfind("Bearer ", 0) != 0) {
      return error_response(401, "missing_token");
    }
    std::string token = auth->substr(7);
    if (!state_.valid_tokens.count(token)) {
      return error_response(401, "invalid_token");
    }
    if (scenario_.token_format == TokenFormat::Jwt) {
      auto second_dot = token.rfind('.');
      auto signed_part = token.substr(0, second_dot);
      std::string expected = util::base64url_encode(
          util::hex64(util::fnv1a(scenario_.jwt_secret() + signed_part)));
      if (token.substr(second_dot + 1) != expected) {
        return error_response(401, "invalid_token_signature");
      }
    }

    // Server-side input length check happens before quota is consumed.
    if (scenario_.input_length.enforcement == InputEnforcement::Server &&
        scenario_.input_length.limit > 0 &&
        submitted.size() > static_cast<std::size_t>(scenario_.input_length.limit)) {
      return error_response(400, "input_too_long");
    }

    if (scenario_.quota.tracking == QuotaTracking::Server && scenario_.quota.limit > 0) {
      int& used = state_.token_use[token];
      if (used >= scenario_.quota.limit) {
        return error_response(429, "quota_exceeded");
      }
      ++used;
    }
  }

  if (!scenario_.token_auth() && !scenario_.token_binding.content_bound) {
    // Input length still applies on tokenless app servers.
    if (scenario_.input_length.enforcement == InputEnforcement::Server &&
        scenario_.input_length.limit > 0 &&
        submitted.size() > static_cast<std::size_t>(scenario_.input_length.limit)) {
      return error_response(400, "input_too_long");
    }
  }

  if (scenario_.moderation.mode == ModerationMode::DedicatedServerRouted &&
      moderation_flags(scenario_, client_text)) {
    return reply_response(probes::kRefusal);
  }

  std::optional<long> client_cap;
  if (body.contains("max_tokens") && body["max_tokens"].is_number_integer()) {
    client_cap = body["max_tokens"].get<long>();
  }

  std::string reply = lm_stub_respond(scenario_, query_, client_text, client_cap);
  if (scenario_.output.clipping == OutputClipping::Server &&
      scenario_.output.max_tokens > 0 &&
      reply.size() > static_cast<std::size_t>(scenario_.output.max_tokens)) {
    reply = reply.substr(0, static_cast<std::size_t>(scenario_.output.max_tokens));
  }
  return reply_response(reply);
}

GymResponse GymCore::handle_app(const GymRequest& request) {
  std::lock_guard lock(mutex_);

  if (request.method == "GET" && request.path == "/api/config") {
    GymResponse r;
    r.body = json{{"features", {"chat"}}, {"version", "1.4.2"}}.dump();
    return r;
  }
  if (request.method == "POST" && request.path == "/log") {
    GymResponse r;
    r.status = 204;
    r.body = "";
    return r;
  }
  if (request.method == "POST" && request.path == "/auth/guest") {
    if (scenario_.quota.token_oracle == TokenOracle::Open) {
      GymResponse r;
      r.body = json{{"token", mint_token_locked()}}.dump();
      return r;
    }
    return error_response(402, "payment_required");
  }
  if (request.method == "POST" && request.path == "/auth/purchase") {
    json body = parse_body(request.body);
    std::string receipt =
        body.is_object() && body.contains("receipt") && body["receipt"].is_string()
            ? body["receipt"].get<std::string>()
            : "";
    if (receipt != scenario_.receipt()) return error_response(402, "receipt_rejected");
    if (state_.consumed_receipts.count(receipt)) {
      return error_response(409, "receipt_already_used");
    }
    state_.consumed_receipts.insert(receipt);
    GymResponse r;
    r.body = json{{"token", mint_token_locked()}}.dump();
    return r;
  }
  if (request.method == "POST" && request.path == "/api/chat") {
    return chat_locked(request);
  }
  return error_response(404, "not_found");
}

GymResponse GymCore::handle_lm(const GymRequest& request) {
  std::lock_guard lock(mutex_);
  ++state_.lm_bound_requests;

  json body = parse_body(request.body);

  if (scenario_.topology == model::Topology::SelfHostedViaAppServer) {
    if (request.method != "POST" || request.path != "/lm/generate") {
      return error_response(404, "not_found");
    }
    std::string prompt = body.is_object() ? body.value("prompt", "") : "";
    std::optional<long> cap;
    if (body.is_object() && body.contains("max_tokens") &&
        body["max_tokens"].is_number_integer()) {
      cap = body["max_tokens"].get<long>();
    }
    GymResponse r;
    r.body = json{{"text", lm_stub_respond(scenario_, query_, prompt, cap)}}.dump();
    return r;
  }

  // Third-party provider emulation.
  const auto& profile = providers::profile_for(scenario_.credentials.provider);
  if (request.method != "POST" || request.path != profile.chat_path) {
    return error_response(404, "not_found");
  }
  bool key_ok = false;
  if (!profile.auth_header.empty()) {
    auto header = har::header_value(request.headers, profile.auth_header);
    key_ok = header && *header == profile.auth_value_prefix + scenario_.provider_key();
  } else if (!profile.key_query_param.empty()) {
    key_ok = request.query_string.find(profile.key_query_param + "=" +
                                       scenario_.provider_key()) != std::string::npos;
  }
  if (!key_ok) {
    return error_response(401, "invalid_api_key");
  }
  std::string prompt = json_string_at(body, profile.prompt_pointer);
  if (prompt.empty()) return error_response(400, "missing_prompt");
  std::optional<long> cap;
  if (body.is_object() && body.contains("max_tokens") &&
      body["max_tokens"].is_number_integer()) {
    cap = body["max_tokens"].get<long>();
  }

  json out;
  out[json::json_pointer(profile.response_pointer)] =
      lm_stub_respond(scenario_, query_, prompt, cap);
  GymResponse r;
  r.body = out.dump();
  return r;
}

GymResponse GymCore::handle_moderation(const GymRequest& request) {
  std::lock_guard lock(mutex_);
  if (request.method != "POST" || request.path != "/v1/moderate") {
    return error_response(404, "not_found");
  }
  json body = parse_body(request.body);
  std::string text = body.is_object() ? body.value("text", "") : "";
  GymResponse r;
  r.body = json{{"flagged", moderation_flags(scenario_, text)}}.dump();
  return r;
}

GymResponse GymCore::handle_api(const GymRequest& request) {
  std::lock_guard lock(mutex_);
  if (request.path == "/plugin/rules") {
    return error_response(401, "login_required");
  }
  if (request.method == "POST" && request.path == "/v1/lookup") {
    GymResponse r;
    r.body = json{{"result", "ok"}}.dump();
    return r;
  }
  return error_response(404, "not_found");
}

}  // namespace lmaudit::gym
