#include "lmaudit/scan/scanner.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <regex>

#include "lmaudit/model/error.hpp"
#include "lmaudit/providers.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::scan {

using model::Credential;
using model::CredentialSource;
using model::Finding;
using model::FindingKind;
using model::Fingerprint;

namespace {

struct CompiledFingerprint {
  const Fingerprint* source;
  std::vector<std::regex> patterns;
};

// Excerpt window around a match, capped at the evidence limit with the
// matched text kept intact.
std::string excerpt_around(const std::string& line, std::size_t match_pos,
                           std::size_t match_len) {
  if (line.size() <= model::kExcerptCap) return line;
  std::size_t window = model::kExcerptCap;
  if (match_len >= window) return line.substr(match_pos, window);
  std::size_t margin = (window - match_len) / 2;
  std::size_t begin = match_pos > margin ? match_pos - margin : 0;
  if (begin + window > line.size()) begin = line.size() - window;
  return line.substr(begin, window);
}

void scan_file(const std::filesystem::path& path, const std::string& relative,
               const std::vector<CompiledFingerprint>& kb, std::vector<Finding>* findings,
               std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    warnings->push_back("unreadable file skipped: " + relative);
    return;
  }

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    for (const auto& compiled : kb) {
      const Fingerprint& fp = *compiled.source;
      for (const auto& marker : fp.url_markers) {
        auto pos = line.find(marker);
        if (pos == std::string::npos) continue;
        Finding f;
        f.provider = fp.provider;
        f.file_path = relative;
        f.line = line_number;
        f.kind = FindingKind::EndpointHit;
        f.excerpt = excerpt_around(line, pos, marker.size());
        findings->push_back(std::move(f));
        break;  // one endpoint hit per provider per line
      }
      for (const auto& pattern : compiled.patterns) {
        std::smatch match;
        if (!std::regex_search(line, match, pattern)) continue;
        Finding f;
        f.provider = fp.provider;
        f.file_path = relative;
        f.line = line_number;
        f.kind = FindingKind::CredentialHit;
        f.excerpt = excerpt_around(line, static_cast<std::size_t>(match.position(0)),
                                   static_cast<std::size_t>(match.length(0)));
        f.credential = Credential{fp.provider, match.str(0), CredentialSource::StaticTree};
        findings->push_back(std::move(f));
        break;
      }
    }
  }
}

bool finding_order(const Finding& a, const Finding& b) {
  if (a.file_path != b.file_path) return a.file_path < b.file_path;
  if (a.line != b.line) return a.line < b.line;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.provider < b.provider;
}

}  // namespace

TreeScanResult scan_tree(const std::filesystem::path& root,
                         const std::vector<Fingerprint>& kb, const ScanOptions& options) {
  if (kb.empty()) throw ValidationError("fingerprint knowledge base is empty");
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw IoError("scan root is not a readable directory: " + root.string());
  }

  std::vector<CompiledFingerprint> compiled;
  compiled.reserve(kb.size());
  for (const auto& fp : kb) {
    fp.validate();
    CompiledFingerprint c{&fp, {}};
    for (const auto& pattern : fp.credential_patterns) {
      c.patterns.emplace_back(pattern, std::regex::ECMAScript | std::regex::optimize);
    }
    compiled.push_back(std::move(c));
  }

  TreeScanResult result;

  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (auto it = std::filesystem::recursive_directory_iterator(
           root, std::filesystem::directory_options::skip_permission_denied, ec);
       it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      result.warnings.push_back("walk error: " + ec.message());
      ec.clear();
      continue;
    }
    if (!it->is_regular_file(ec)) continue;
    files.emplace_back(it->path(),
                       std::filesystem::relative(it->path(), root).generic_string());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });

  if (options.parallel && files.size() >= options.min_files_for_parallel) {
    unsigned lanes = std::min<unsigned>(std::thread::hardware_concurrency(), 8);
    if (lanes < 2) lanes = 2;
    std::vector<std::future<TreeScanResult>> futures;
    std::size_t chunk = (files.size() + lanes - 1) / lanes;
    for (unsigned lane = 0; lane < lanes; ++lane) {
      std::size_t begin = lane * chunk;
      if (begin >= files.size()) break;
      std::size_t end = std::min(files.size(), begin + chunk);
      futures.push_back(std::async(std::launch::async, [&, begin, end] {
        TreeScanResult part;
        for (std::size_t i = begin; i < end; ++i) {
          scan_file(files[i].first, files[i].second, compiled, &part.findings,
                    &part.warnings);
        }
        return part;
      }));
    }
    for (auto& f : futures) {
      TreeScanResult part = f.get();
      result.findings.insert(result.findings.end(), part.findings.begin(),
                             part.findings.end());
      result.warnings.insert(result.warnings.end(), part.warnings.begin(),
                             part.warnings.end());
    }
  } else {
    for (const auto& [path, relative] : files) {
      scan_file(path, relative, compiled, &result.findings, &result.warnings);
    }
  }

  std::sort(result.findings.begin(), result.findings.end(), finding_order);
  std::sort(result.warnings.begin(), result.warnings.end());
  return result;
}

std::vector<Fingerprint> default_fingerprints() {
  std::vector<Fingerprint> kb;
  for (const auto& profile : providers::all_profiles()) {
    Fingerprint fp;
    fp.provider = profile.id;
    fp.url_markers = {profile.url_marker};
    fp.credential_patterns = {profile.credential_pattern};
    fp.template_plan_id = profile.template_plan_id;
    kb.push_back(std::move(fp));
  }
  return kb;
}

std::vector<Fingerprint> load_fingerprints(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(util::read_file(path));
  if (!j.contains("fingerprints")) throw ParseError("config has no fingerprints array");
  return j.at("fingerprints").get<std::vector<Fingerprint>>();
}

std::string fingerprints_to_document(const std::vector<Fingerprint>& kb) {
  nlohmann::json j{{"fingerprints", kb}};
  return j.dump(2) + "\n";
}

model::ExploitPlan instantiate_template(model::Provider provider,
                                        const Credential& credential,
                                        const har::CanonicalQuery& q) {
  if (credential.provider != provider) {
    throw ValidationError("credential provider does not match the requested template");
  }
  credential.validate();
  const auto& profile = providers::profile_for(provider);

  model::ExploitPlan plan;
  plan.target_id = "static:" + profile.name;
  plan.auth.variant = model::AuthVariant::NoAuth;

  model::RequestStep query;
  query.id = "query";
  query.method = "POST";
  query.url_template = "{base}" + profile.chat_path;
  if (!profile.key_query_param.empty()) {
    query.url_template += "?" + profile.key_query_param + "={api_key}";
  }
  query.headers["Content-Type"] = "application/json";
  if (!profile.auth_header.empty()) {
    query.headers[profile.auth_header] = profile.auth_value_prefix + "{api_key}";
  }
  query.body_template = profile.request_template;
  query.bindings = {{"api_key", model::BindingSource::make_literal(credential.value)},
                    {"user_query", model::BindingSource::user_query()}};
  plan.steps = {query};

  plan.answer_extraction.step_id = "query";
  plan.answer_extraction.mode = model::ExtractionMode::JsonPath;
  plan.answer_extraction.paths = {profile.response_pointer};
  plan.answer_extraction.expected_markers = q.expected_markers;

  plan.validate();
  return plan;
}

}  // namespace lmaudit::scan
