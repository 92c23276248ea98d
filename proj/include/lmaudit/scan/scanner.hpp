#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lmaudit/har/model.hpp"
#include "lmaudit/model/plan.hpp"
#include "lmaudit/model/types.hpp"

namespace lmaudit::scan {

struct ScanOptions {
  bool parallel = true;
  std::size_t min_files_for_parallel = 32;
};

struct TreeScanResult {
  std::vector<model::Finding> findings;  // sorted by (file_path, line)
  std::vector<std::string> warnings;     // unreadable files, etc.
};

/// Walk a decompiled source tree and match endpoint markers (literal
/// substrings) and credential patterns (regexes), line by line. Output is
/// deterministic: findings are sorted and file paths are root-relative.
TreeScanResult scan_tree(const std::filesystem::path& root,
                         const std::vector<model::Fingerprint>& kb,
                         const ScanOptions& options = {});

/// Bundled fingerprints for the ten known providers. Patterns are data:
/// override them with a config file when key formats change.
std::vector<model::Fingerprint> default_fingerprints();

std::vector<model::Fingerprint> load_fingerprints(const std::string& path);
std::string fingerprints_to_document(const std::vector<model::Fingerprint>& kb);

/// Build the provider's template plan around a captured credential:
/// no token step, a single query step with the key embedded as a binding.
model::ExploitPlan instantiate_template(
    model::Provider provider, const model::Credential& credential,
    const har::CanonicalQuery& q = har::default_canonical_query());

}  // namespace lmaudit::scan
