#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lmaudit/model/enums.hpp"

namespace lmaudit::model {

using nlohmann::json;

/// Evidence excerpts stored in profiles and findings are capped at this size.
inline constexpr std::size_t kExcerptCap = 512;

/// Truncate a response excerpt to the bounded evidence size.
std::string truncate_excerpt(std::string_view text);

/// A (type, layer, mechanism) cell of the restriction taxonomy.
/// Construction rejects combinations outside the 14 valid cells.
class RestrictionMethod {
 public:
  RestrictionMethod(RestrictionType type, RestrictionLayer layer, Mechanism mechanism);

  RestrictionType type() const { return type_; }
  RestrictionLayer layer() const { return layer_; }
  Mechanism mechanism() const { return mechanism_; }

  friend bool operator==(const RestrictionMethod&, const RestrictionMethod&) = default;

 private:
  RestrictionType type_;
  RestrictionLayer layer_;
  Mechanism mechanism_;
};

void to_json(json& j, const RestrictionMethod& m);
void from_json(const json& j, RestrictionMethod& m);

/// Where an authentication scheme was observed in captured traffic.
struct AuthEvidence {
  std::string entry_id;
  std::string header_name;
  std::string value;  // observed credential material; empty for NoAuth

  friend bool operator==(const AuthEvidence&, const AuthEvidence&) = default;
};

/// Structural JWT check: three dot-separated, non-empty base64url segments.
bool looks_like_jwt(std::string_view token);

struct AuthScheme {
  AuthVariant variant = AuthVariant::Unknown;
  std::vector<AuthEvidence> evidence;

  /// Jwt evidence values must be structurally valid JWTs.
  void validate() const;

  friend bool operator==(const AuthScheme&, const AuthScheme&) = default;
};

void to_json(json& j, const AuthEvidence& e);
void from_json(const json& j, AuthEvidence& e);
void to_json(json& j, const AuthScheme& a);
void from_json(const json& j, AuthScheme& a);

/// Hard ceiling on LM-bound queries per session.
inline constexpr int kMaxLmQueries = 3;

/// Counts LM-bound queries against a hard ceiling. Charging past the limit
/// throws BudgetExhausted; the request must not be issued.
class QueryBudget {
 public:
  QueryBudget() : QueryBudget(kMaxLmQueries) {}
  explicit QueryBudget(int max_lm_queries, int consumed = 0);

  bool can_charge() const { return consumed_ < max_; }
  void charge();

  int max_lm_queries() const { return max_; }
  int consumed() const { return consumed_; }

  friend bool operator==(const QueryBudget&, const QueryBudget&) = default;

 private:
  int max_;
  int consumed_;
};

void to_json(json& j, const QueryBudget& b);
void from_json(const json& j, QueryBudget& b);

/// One probe-or-bypass observation backing a profile status.
struct ProbeEvidence {
  std::string probe_id;
  std::string excerpt;  // capped at kExcerptCap bytes

  friend bool operator==(const ProbeEvidence&, const ProbeEvidence&) = default;
};

void to_json(json& j, const ProbeEvidence& e);
void from_json(const json& j, ProbeEvidence& e);

/// Per-restriction-type outcome of interrogation and bypass attempts.
/// Status transitions enforce Bypassed/BypassFailed => Detected.
class RestrictionProfile {
 public:
  RestrictionStatus status(RestrictionType type) const;

  void mark_detected(RestrictionType type);
  void mark_bypassed(RestrictionType type);      // requires Detected
  void mark_bypass_failed(RestrictionType type); // requires Detected

  void add_evidence(RestrictionType type, std::string probe_id, std::string_view excerpt);
  const std::vector<ProbeEvidence>& evidence(RestrictionType type) const;

  bool low_confidence() const { return low_confidence_; }
  void set_low_confidence() { low_confidence_ = true; }

  friend bool operator==(const RestrictionProfile&, const RestrictionProfile&) = default;

  friend void to_json(json& j, const RestrictionProfile& p);
  friend void from_json(const json& j, RestrictionProfile& p);

 private:
  std::array<RestrictionStatus, 4> statuses_{
      RestrictionStatus::NotDetected, RestrictionStatus::NotDetected,
      RestrictionStatus::NotDetected, RestrictionStatus::NotDetected};
  std::array<std::vector<ProbeEvidence>, 4> evidence_{};
  bool low_confidence_ = false;
};

/// A captured secret. Never rendered in full; see redacted().
struct Credential {
  Provider provider = Provider::OpenAi;
  std::string value;
  CredentialSource source = CredentialSource::StaticTree;

  void validate() const;  // value nonempty

  /// Display form: all but the last four characters masked.
  std::string redacted() const;

  friend bool operator==(const Credential&, const Credential&) = default;
};

void to_json(json& j, const Credential& c);
void from_json(const json& j, Credential& c);

/// One static-scan hit: an endpoint marker or a credential match.
struct Finding {
  Provider provider = Provider::OpenAi;
  std::string file_path;
  int line = 0;
  FindingKind kind = FindingKind::EndpointHit;
  std::string excerpt;  // contains the matched marker verbatim
  std::optional<Credential> credential;

  friend bool operator==(const Finding&, const Finding&) = default;
};

void to_json(json& j, const Finding& f);
void from_json(const json& j, Finding& f);

/// Endpoint and credential patterns for one LM provider.
struct Fingerprint {
  Provider provider = Provider::OpenAi;
  std::vector<std::string> url_markers;
  std::vector<std::string> credential_patterns;  // regex source strings
  std::string template_plan_id;

  void validate() const;  // >=1 url marker, nonempty template id

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

void to_json(json& j, const Fingerprint& f);
void from_json(const json& j, Fingerprint& f);

}  // namespace lmaudit::model
