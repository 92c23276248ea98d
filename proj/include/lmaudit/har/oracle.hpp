#pragma once

#include "lmaudit/har/model.hpp"

namespace lmaudit::har {

enum class EntryPurpose { LmRequest, Moderation, Logging, Other };

/// Text-classification seam standing in for an external relevance model.
/// The default is deterministic and rule-based so analysis runs offline;
/// an external service can be plugged in through the same interface.
class RelevanceOracle {
 public:
  virtual ~RelevanceOracle() = default;

  /// What role does this exchange play in the app's LM interaction?
  virtual EntryPurpose classify(const HarEntry& entry) const = 0;

  /// Could this entry's response plausibly carry an LM answer?
  virtual bool answer_candidate(const HarEntry& entry) const = 0;
};

/// Endpoint-shape, field-name, and body-shape heuristics.
class RuleBasedOracle final : public RelevanceOracle {
 public:
  EntryPurpose classify(const HarEntry& entry) const override;
  bool answer_candidate(const HarEntry& entry) const override;
};

const RelevanceOracle& default_oracle();

}  // namespace lmaudit::har
