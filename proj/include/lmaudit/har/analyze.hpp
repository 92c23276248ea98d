#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lmaudit/har/model.hpp"
#include "lmaudit/har/oracle.hpp"
#include "lmaudit/model/plan.hpp"
#include "lmaudit/model/types.hpp"

namespace lmaudit::har {

/// Purely subtractive and idempotent; relative order is preserved.
HarArchive apply_denylist(const HarArchive& archive, const Denylist& denylist);

struct QueryLocation {
  std::string entry_id;
  std::string match_note;  // where in the request the probe text was found
};

/// Earliest entry whose request body carries the probe verbatim and which the
/// oracle classifies as an LM request (not logging or moderation).
std::optional<QueryLocation> locate_query_entry(
    const HarArchive& archive, const CanonicalQuery& q,
    const RelevanceOracle& oracle = default_oracle());

struct AnswerLocation {
  std::string entry_id;
  model::ExtractionRule rule;
  bool via_fallback = false;  // oracle vote instead of marker match
};

/// Primary strategy: case-insensitive presence of all expected markers in a
/// decoded response body (event-stream bodies are concatenated first).
/// Fallback: relevance-oracle vote over candidate entries.
std::optional<AnswerLocation> locate_answer_entry(
    const HarArchive& archive, const CanonicalQuery& q, const std::string& query_entry_id,
    const RelevanceOracle& oracle = default_oracle());

struct AuthClassification {
  model::AuthScheme scheme;
  std::optional<model::Credential> captured_key;  // embedded third-party key
};

/// Total, deterministic classification of the query entry's authentication.
AuthClassification classify_auth(const HarArchive& archive, const std::string& query_entry_id,
                                 const std::vector<model::Fingerprint>& kb);

/// The query/answer entries plus entries that set, refresh, or first transmit
/// the observed token value, in time order. Always contains the query entry.
std::vector<HarEntry> select_relevant_entries(const HarArchive& archive,
                                              const std::string& query_entry_id,
                                              const AuthClassification& auth,
                                              const std::string& answer_entry_id = "");

/// Field names recognized when hunting for tunable parameters.
struct TunableFieldConfig {
  std::vector<std::string> max_tokens_fields = {"max_tokens", "maxOutputTokens",
                                                "max_new_tokens"};
  std::vector<std::string> model_fields = {"model"};
  std::vector<std::string> preprompt_fields = {"system", "system_prompt", "preprompt"};
};

/// Detect a max-token-like field, a model identifier, and any pre-prompt
/// segment concatenated to (or shipped alongside) the canonical query.
Tunables extract_tunables(const HarEntry& query_entry, const CanonicalQuery& q,
                          const TunableFieldConfig& config = {});

}  // namespace lmaudit::har
