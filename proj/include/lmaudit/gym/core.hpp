#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "lmaudit/gym/scenario.hpp"
#include "lmaudit/har/model.hpp"

namespace lmaudit::gym {

struct GymRequest {
  std::string method;
  std::string path;          // no query string
  std::string query_string;  // without '?'
  har::HeaderList headers;
  std::string body;

  std::string path_and_query() const {
    return query_string.empty() ? path : path + "?" + query_string;
  }
};

struct GymResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Recording emits the canonical app-shaped responses; Serving additionally
/// applies live-only quirks (nested reply drift).
enum class GymMode { Recording, Serving };

struct GymState {
  std::map<std::string, int> token_use;  // token -> LM queries consumed
  std::set<std::string> valid_tokens;
  std::set<std::string> consumed_receipts;
  int mint_counter = 0;
  int lm_bound_requests = 0;  // queries that reached an LM endpoint
};

/// The deterministic mock backend: app-server, LM stub, moderation and API
/// endpoints, all driven by one scenario. Identical scenario + request
/// sequence yields identical responses.
class GymCore {
 public:
  GymCore(GymScenario scenario, GymMode mode,
          har::CanonicalQuery query = har::default_canonical_query(),
          GymState initial_state = {});

  GymResponse handle_app(const GymRequest& request);
  GymResponse handle_lm(const GymRequest& request);
  GymResponse handle_moderation(const GymRequest& request);
  GymResponse handle_api(const GymRequest& request);

  const GymScenario& scenario() const { return scenario_; }
  const har::CanonicalQuery& query() const { return query_; }

  GymState state_snapshot();
  int lm_bound_requests();
  void reset_lm_counter();

  /// Mint bypassing the oracle policy; recording-only (models the legitimate
  /// paid session that produced the fixture traffic).
  std::string record_mint();

  /// Content-bound token the legitimate app would compute for a query.
  std::string content_token(const std::string& text) const;

 private:
  std::string mint_token_locked();
  GymResponse chat_locked(const GymRequest& request);
  GymResponse reply_response(const std::string& text) const;

  GymScenario scenario_;
  GymMode mode_;
  har::CanonicalQuery query_;
  GymState state_;
  std::mutex mutex_;
};

/// The LM automaton: canonical-table lookups plus refusal/admission rules.
/// Pure function of (scenario, query config, prompt, client cap).
std::string lm_stub_respond(const GymScenario& s, const har::CanonicalQuery& q,
                            const std::string& prompt,
                            std::optional<long> client_max_tokens);

bool moderation_flags(const GymScenario& s, const std::string& text);

std::string canonical_answer(const har::CanonicalQuery& q);
const std::string& long_answer();
std::string plugin_rules_text(const GymScenario& s);

/// Split a batched interrogation prompt into its numbered questions.
std::vector<std::string> split_batch_questions(const std::string& prompt);

}  // namespace lmaudit::gym
