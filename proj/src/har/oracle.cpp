#include "lmaudit/har/oracle.hpp"

#include "lmaudit/util.hpp"

namespace lmaudit::har {

namespace {

bool url_has_any(const std::string& url, std::initializer_list<const char*> needles) {
  for (const char* n : needles) {
    if (util::contains_ci(url, n)) return true;
  }
  return false;
}

bool body_has_prompt_field(const std::string& body) {
  static const char* kFields[] = {"\"prompt\"", "\"messages\"", "\"message\"",
                                  "\"input\"",  "\"query\"",    "\"contents\"",
                                  "\"text\"",   "\"instances\"", "\"note\""};
  for (const char* f : kFields) {
    if (body.find(f) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

EntryPurpose RuleBasedOracle::classify(const HarEntry& entry) const {
  const std::string& url = entry.request.url;

  // Telemetry shapes take priority: a logging beacon may carry the probe
  // text without being the LM request.
  if (url_has_any(url, {"/log", "/track", "/beacon", "/telemetry", "/metric",
                        "analytics", "/event"})) {
    return EntryPurpose::Logging;
  }
  if (url_has_any(url, {"moderat", "/mod/", "content-filter"})) {
    return EntryPurpose::Moderation;
  }
  if (url_has_any(url, {"chat", "complet", "generate", "assist", "/lm", "llm", "predict",
                        "/ai/", "conversation", "answer", "models/"})) {
    return EntryPurpose::LmRequest;
  }
  if (entry.request.method == "POST" && body_has_prompt_field(entry.request.body)) {
    return EntryPurpose::LmRequest;
  }
  return EntryPurpose::Other;
}

bool RuleBasedOracle::answer_candidate(const HarEntry& entry) const {
  if (entry.response.status < 200 || entry.response.status >= 300) return false;
  if (entry.response.body.empty()) return false;
  const std::string& ct = entry.response.content_type;
  bool texty = util::contains_ci(ct, "json") || util::contains_ci(ct, "text") ||
               util::contains_ci(ct, "event-stream");
  return texty && classify(entry) == EntryPurpose::LmRequest;
}

const RelevanceOracle& default_oracle() {
  static const RuleBasedOracle kOracle;
  return kOracle;
}

}  // namespace lmaudit::har
