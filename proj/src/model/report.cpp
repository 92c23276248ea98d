#include "lmaudit/model/report.hpp"

#include "lmaudit/model/error.hpp"

namespace lmaudit::model {

void VerificationSummary::validate() const {
  if (attempts < 1 || attempts > 3) {
    throw ValidationError("verification attempts must be 1..3");
  }
  if (succeeded && failure_reason) {
    throw ValidationError("successful verification cannot carry a failure reason");
  }
}

void to_json(json& j, const VerificationSummary& v) {
  j = json{{"succeeded", v.succeeded}, {"attempts", v.attempts}, {"log_ref", v.log_ref}};
  if (v.failure_reason) j["failure_reason"] = *v.failure_reason;
}

void from_json(const json& j, VerificationSummary& v) {
  v = VerificationSummary{};
  j.at("succeeded").get_to(v.succeeded);
  j.at("attempts").get_to(v.attempts);
  j.at("log_ref").get_to(v.log_ref);
  if (j.contains("failure_reason")) {
    v.failure_reason = j.at("failure_reason").get<FailureReason>();
  }
  v.validate();
}

void ScanReport::validate() const {
  if (verification) {
    verification->validate();
    if (!plan) throw ValidationError("verification present without a plan");
  }
  if (plan) plan->validate();
  auth.validate();
}

void to_json(json& j, const ScanReport& r) {
  j = json{{"version", r.version},
           {"target_id", r.target_id},
           {"static_findings", r.static_findings},
           {"auth", r.auth},
           {"request_log_ref", r.request_log_ref},
           {"errors", r.errors}};
  if (r.plan) j["plan"] = *r.plan;
  if (r.verification) j["verification"] = *r.verification;
  if (r.profile) j["profile"] = *r.profile;
}

void from_json(const json& j, ScanReport& r) {
  r = ScanReport{};
  j.at("version").get_to(r.version);
  j.at("target_id").get_to(r.target_id);
  j.at("static_findings").get_to(r.static_findings);
  j.at("auth").get_to(r.auth);
  j.at("request_log_ref").get_to(r.request_log_ref);
  j.at("errors").get_to(r.errors);
  if (j.contains("plan")) r.plan = j.at("plan").get<ExploitPlan>();
  if (j.contains("verification")) {
    r.verification = j.at("verification").get<VerificationSummary>();
  }
  if (j.contains("profile")) r.profile = j.at("profile").get<RestrictionProfile>();
  r.validate();
}

std::string serialize_report(const ScanReport& r) {
  r.validate();
  json j = r;
  return j.dump(2) + "\n";
}

ScanReport parse_report(const std::string& text) {
  json j = json::parse(text);
  return j.get<ScanReport>();
}

}  // namespace lmaudit::model
