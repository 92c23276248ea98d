#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmaudit/model/plan.hpp"
#include "lmaudit/model/types.hpp"

namespace lmaudit::model {

/// Outcome of the bounded verification loop (at most three executions).
struct VerificationSummary {
  bool succeeded = false;
  int attempts = 1;  // 1..3
  std::optional<FailureReason> failure_reason;
  std::string log_ref;

  void validate() const;

  friend bool operator==(const VerificationSummary&, const VerificationSummary&) = default;
};

void to_json(json& j, const VerificationSummary& v);
void from_json(const json& j, VerificationSummary& v);

inline constexpr int kReportSchemaVersion = 1;

/// Unified machine-readable outcome of a pipeline run. Credentials inside
/// a report are stored redacted; executable secrets live in plan files only.
struct ScanReport {
  int version = kReportSchemaVersion;
  std::string target_id;
  std::vector<Finding> static_findings;
  AuthScheme auth;
  std::optional<ExploitPlan> plan;
  std::optional<VerificationSummary> verification;
  std::optional<RestrictionProfile> profile;
  std::string request_log_ref;
  std::vector<std::string> errors;  // partial-failure annotations

  /// verification requires a plan; attempts stay in 1..3.
  void validate() const;

  friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

void to_json(json& j, const ScanReport& r);
void from_json(const json& j, ScanReport& r);

std::string serialize_report(const ScanReport& r);
ScanReport parse_report(const std::string& text);

}  // namespace lmaudit::model
