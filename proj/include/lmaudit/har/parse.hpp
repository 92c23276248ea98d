#pragma once

#include <string>
#include <vector>

#include "lmaudit/har/model.hpp"

namespace lmaudit::har {

/// HAR 1.2 ingestion. Entries are ordered by start time and given stable
/// sequential ids; base64-encoded response bodies are decoded. A malformed
/// document throws ParseError; entries missing mandatory fields are skipped
/// and reported through `warnings`.
HarArchive parse_har(const std::string& document, std::vector<std::string>* warnings = nullptr);

/// Render entries back into a HAR 1.2 document (used for fixture emission
/// and execution-log export).
std::string make_har_document(const std::vector<HarEntry>& entries);

json entry_to_har_json(const HarEntry& entry);

}  // namespace lmaudit::har
