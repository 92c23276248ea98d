#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lmaudit/model/plan.hpp"

namespace lmaudit::model {

/// Split a server-sent-event stream body into its data segments, in order.
/// Multi-line data fields within one event are joined with newlines.
std::vector<std::string> sse_data_segments(std::string_view body);

/// Case-insensitive (ASCII) containment of every marker, order-independent.
bool contains_all_markers(std::string_view text, const std::vector<std::string>& markers);

/// Result of applying an ExtractionRule to a response body.
struct Extraction {
  bool parsed = false;   // the rule's paths/structure resolved
  bool matched = false;  // all expected markers present in `text`
  std::string text;      // the extracted answer text
  std::string error;     // diagnostic when !parsed
};

/// Apply a rule to a raw response body. JsonPath resolves each pointer in
/// `paths` and concatenates the string values; SubstringScan uses the whole
/// body; SseConcat concatenates every event-stream data segment (applying
/// `paths` to JSON segments when given) before the marker check.
Extraction apply_extraction(const ExtractionRule& rule, std::string_view body);

}  // namespace lmaudit::model
