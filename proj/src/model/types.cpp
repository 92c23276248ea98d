#include "lmaudit/model/types.hpp"

#include <algorithm>

#include "lmaudit/model/error.hpp"

namespace lmaudit::model {

std::string truncate_excerpt(std::string_view text) {
  if (text.size() <= kExcerptCap) return std::string(text);
  return std::string(text.substr(0, kExcerptCap));
}

RestrictionMethod::RestrictionMethod(RestrictionType type, RestrictionLayer layer,
                                     Mechanism mechanism)
    : type_(type), layer_(layer), mechanism_(mechanism) {
  if (!is_valid_cell(type, layer, mechanism)) {
    throw ValidationError("restriction method is not a valid taxonomy cell");
  }
}

void to_json(json& j, const RestrictionMethod& m) {
  j = json{{"type", m.type()}, {"layer", m.layer()}, {"mechanism", m.mechanism()}};
}

void from_json(const json& j, RestrictionMethod& m) {
  m = RestrictionMethod(j.at("type").get<RestrictionType>(),
                        j.at("layer").get<RestrictionLayer>(),
                        j.at("mechanism").get<Mechanism>());
}

namespace {

bool is_base64url_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '_' || c == '=';
}

}  // namespace

bool looks_like_jwt(std::string_view token) {
  std::size_t first = token.find('.');
  if (first == std::string_view::npos) return false;
  std::size_t second = token.find('.', first + 1);
  if (second == std::string_view::npos) return false;
  if (token.find('.', second + 1) != std::string_view::npos) return false;

  std::string_view segments[3] = {token.substr(0, first),
                                  token.substr(first + 1, second - first - 1),
                                  token.substr(second + 1)};
  for (auto segment : segments) {
    if (segment.empty()) return false;
    if (!std::all_of(segment.begin(), segment.end(), is_base64url_char)) return false;
  }
  return true;
}

void AuthScheme::validate() const {
  if (variant != AuthVariant::Jwt) return;
  for (const auto& e : evidence) {
    if (!looks_like_jwt(e.value)) {
      throw ValidationError("jwt evidence value is not three base64url segments");
    }
  }
}

void to_json(json& j, const AuthEvidence& e) {
  j = json{{"entry_id", e.entry_id}, {"header_name", e.header_name}, {"value", e.value}};
}

void from_json(const json& j, AuthEvidence& e) {
  j.at("entry_id").get_to(e.entry_id);
  j.at("header_name").get_to(e.header_name);
  j.at("value").get_to(e.value);
}

void to_json(json& j, const AuthScheme& a) {
  j = json{{"variant", a.variant}, {"evidence", a.evidence}};
}

void from_json(const json& j, AuthScheme& a) {
  j.at("variant").get_to(a.variant);
  j.at("evidence").get_to(a.evidence);
  a.validate();
}

QueryBudget::QueryBudget(int max_lm_queries, int consumed)
    : max_(max_lm_queries), consumed_(consumed) {
  if (max_ < 0 || max_ > kMaxLmQueries) {
    throw ValidationError("budget must lie in [0, 3]");
  }
  if (consumed_ < 0 || consumed_ > max_) {
    throw ValidationError("consumed exceeds budget");
  }
}

void QueryBudget::charge() {
  if (consumed_ >= max_) {
    throw BudgetExhausted("query budget of " + std::to_string(max_) + " exhausted");
  }
  ++consumed_;
}

void to_json(json& j, const QueryBudget& b) {
  j = json{{"max_lm_queries", b.max_lm_queries()}, {"consumed", b.consumed()}};
}

void from_json(const json& j, QueryBudget& b) {
  b = QueryBudget(j.at("max_lm_queries").get<int>(), j.at("consumed").get<int>());
}

void to_json(json& j, const ProbeEvidence& e) {
  j = json{{"probe_id", e.probe_id}, {"excerpt", e.excerpt}};
}

void from_json(const json& j, ProbeEvidence& e) {
  j.at("probe_id").get_to(e.probe_id);
  j.at("excerpt").get_to(e.excerpt);
}

namespace {

std::size_t type_index(RestrictionType type) {
  return static_cast<std::size_t>(type);
}

constexpr RestrictionType kAllTypes[] = {RestrictionType::QuotaR, RestrictionType::TopicR,
                                         RestrictionType::ModR, RestrictionType::PipR};

}  // namespace

RestrictionStatus RestrictionProfile::status(RestrictionType type) const {
  return statuses_[type_index(type)];
}

void RestrictionProfile::mark_detected(RestrictionType type) {
  auto& s = statuses_[type_index(type)];
  if (s == RestrictionStatus::NotDetected) s = RestrictionStatus::Detected;
}

void RestrictionProfile::mark_bypassed(RestrictionType type) {
  auto& s = statuses_[type_index(type)];
  if (s == RestrictionStatus::NotDetected) {
    throw ValidationError("cannot mark bypassed before detected");
  }
  s = RestrictionStatus::Bypassed;
}

void RestrictionProfile::mark_bypass_failed(RestrictionType type) {
  auto& s = statuses_[type_index(type)];
  if (s == RestrictionStatus::NotDetected) {
    throw ValidationError("cannot mark bypass-failed before detected");
  }
  if (s != RestrictionStatus::Bypassed) s = RestrictionStatus::BypassFailed;
}

void RestrictionProfile::add_evidence(RestrictionType type, std::string probe_id,
                                      std::string_view excerpt) {
  evidence_[type_index(type)].push_back(
      ProbeEvidence{std::move(probe_id), truncate_excerpt(excerpt)});
}

const std::vector<ProbeEvidence>& RestrictionProfile::evidence(RestrictionType type) const {
  return evidence_[type_index(type)];
}

void to_json(json& j, const RestrictionProfile& p) {
  json statuses = json::object();
  json evidence = json::object();
  for (auto type : kAllTypes) {
    statuses[to_tag(type)] = p.statuses_[type_index(type)];
    evidence[to_tag(type)] = p.evidence_[type_index(type)];
  }
  j = json{{"statuses", statuses},
           {"evidence", evidence},
           {"low_confidence", p.low_confidence_}};
}

void from_json(const json& j, RestrictionProfile& p) {
  p = RestrictionProfile{};
  for (auto type : kAllTypes) {
    auto status = j.at("statuses").at(to_tag(type)).get<RestrictionStatus>();
    auto evidence = j.at("evidence").at(to_tag(type)).get<std::vector<ProbeEvidence>>();
    // Re-applying transitions keeps the Bypassed => Detected invariant.
    if (status != RestrictionStatus::NotDetected) p.mark_detected(type);
    if (status == RestrictionStatus::Bypassed) p.mark_bypassed(type);
    if (status == RestrictionStatus::BypassFailed) p.mark_bypass_failed(type);
    p.evidence_[type_index(type)] = std::move(evidence);
  }
  if (j.value("low_confidence", false)) p.set_low_confidence();
}

void Credential::validate() const {
  if (value.empty()) throw ValidationError("credential value must be nonempty");
}

std::string Credential::redacted() const {
  constexpr std::size_t kVisible = 4;
  if (value.size() <= kVisible) return std::string(value.size(), '*');
  return std::string(value.size() - kVisible, '*') + value.substr(value.size() - kVisible);
}

void to_json(json& j, const Credential& c) {
  j = json{{"provider", c.provider}, {"value", c.value}, {"source", c.source}};
}

void from_json(const json& j, Credential& c) {
  j.at("provider").get_to(c.provider);
  j.at("value").get_to(c.value);
  j.at("source").get_to(c.source);
  c.validate();
}

void to_json(json& j, const Finding& f) {
  j = json{{"provider", f.provider},
           {"file_path", f.file_path},
           {"line", f.line},
           {"kind", f.kind},
           {"excerpt", f.excerpt}};
  if (f.credential) j["credential"] = *f.credential;
}

void from_json(const json& j, Finding& f) {
  j.at("provider").get_to(f.provider);
  j.at("file_path").get_to(f.file_path);
  j.at("line").get_to(f.line);
  j.at("kind").get_to(f.kind);
  j.at("excerpt").get_to(f.excerpt);
  if (j.contains("credential")) f.credential = j.at("credential").get<Credential>();
}

void Fingerprint::validate() const {
  if (url_markers.empty()) throw ValidationError("fingerprint needs at least one url marker");
  if (template_plan_id.empty()) throw ValidationError("fingerprint needs a template plan id");
}

void to_json(json& j, const Fingerprint& f) {
  j = json{{"provider", f.provider},
           {"url_markers", f.url_markers},
           {"credential_patterns", f.credential_patterns},
           {"template_plan_id", f.template_plan_id}};
}

void from_json(const json& j, Fingerprint& f) {
  j.at("provider").get_to(f.provider);
  j.at("url_markers").get_to(f.url_markers);
  j.at("credential_patterns").get_to(f.credential_patterns);
  j.at("template_plan_id").get_to(f.template_plan_id);
  f.validate();
}

}  // namespace lmaudit::model
