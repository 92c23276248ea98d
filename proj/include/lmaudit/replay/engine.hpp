#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmaudit/har/model.hpp"
#include "lmaudit/model/plan.hpp"

namespace lmaudit::replay {

/// Where a plan's host placeholders point and how politely to drive them.
struct TargetBinding {
  std::map<std::string, std::string> hosts;  // placeholder -> base URL
  int timeout_seconds = 10;
  int min_lm_delay_ms = 500;  // pause between LM-bound requests
};

/// One wire exchange, recorded verbatim (including failures).
struct Exchange {
  std::string step_id;
  std::string started_at;
  std::string method;
  std::string url;
  har::HeaderList request_headers;
  std::string request_body;
  bool transport_ok = false;
  int status = 0;
  har::HeaderList response_headers;
  std::string content_type;
  std::string response_body;
};

struct ExecutionLog {
  std::vector<Exchange> exchanges;
  model::QueryBudget budget_snapshot;

  std::vector<har::HarEntry> to_har_entries() const;
  std::string to_har_document() const;
  const Exchange* last_for_step(const std::string& step_id) const;
};

struct ConcreteRequest {
  std::string method;
  std::string url;
  std::map<std::string, std::string> headers;
  std::optional<std::string> body;
  std::vector<std::string> redact_headers;  // secret-bearing header names
};

/// Single-pass template substitution; values are never re-expanded. Throws
/// PlanError when a placeholder has no value.
ConcreteRequest render_request(const model::RequestStep& step,
                               const std::map<std::string, std::string>& values,
                               const TargetBinding& target);

struct ExecutionResult {
  ExecutionLog log;
  bool completed = false;
  std::optional<model::FailureReason> failure;
  std::string diagnostic;
};

/// Drives plans against one target: owns the token cache, rate limiting, and
/// the running count of successful LM queries (quota-bypass evidence).
/// One session executes plans strictly sequentially.
class ExecutionSession {
 public:
  explicit ExecutionSession(TargetBinding target);
  ~ExecutionSession();

  /// Steps run in order; the token step runs lazily on first reference and
  /// again when the plan demands a refresh. The log is complete even when a
  /// step fails mid-plan. Budget is charged before any LM-bound request is
  /// issued; exceeding it fails the execution without network I/O.
  ExecutionResult execute_plan(const model::ExploitPlan& plan,
                               const std::string& query_text, model::QueryBudget& budget);

  int successful_lm_queries() const { return successful_lm_queries_; }
  void invalidate_token() { token_.reset(); }
  const TargetBinding& target() const { return target_; }

 private:
  struct HttpClientPool;

  std::optional<std::string> acquire_token(const model::ExploitPlan& plan,
                                           ExecutionLog& log, std::string* error);
  Exchange perform(const ConcreteRequest& request, const std::string& step_id);

  TargetBinding target_;
  std::optional<std::string> token_;
  std::unique_ptr<HttpClientPool> clients_;
  std::chrono::steady_clock::time_point last_lm_request_{};
  bool any_lm_request_ = false;
  int successful_lm_queries_ = 0;
};

struct CheckResult {
  bool found = false;
  bool parse_failed = false;
  std::string text;
  std::string diagnostic;
};

/// Apply the plan's extraction rule to the designated step's logged response.
CheckResult check_answer(const ExecutionLog& log, const model::ExtractionRule& rule);

}  // namespace lmaudit::replay
