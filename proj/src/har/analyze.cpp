#include "lmaudit/har/analyze.hpp"

#include <algorithm>
#include <functional>

#include "lmaudit/model/extraction.hpp"
#include "lmaudit/providers.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::har {

using model::AuthVariant;
using model::ExtractionMode;

HarArchive apply_denylist(const HarArchive& archive, const Denylist& denylist) {
  HarArchive out;
  for (const auto& entry : archive.entries) {
    bool drop = false;
    for (const auto& pattern : denylist.url_patterns) {
      if (util::contains_ci(entry.request.url, pattern)) {
        drop = true;
        break;
      }
    }
    if (!drop) {
      for (const auto& type : denylist.blocked_content_types) {
        if (util::contains_ci(entry.response.content_type, type)) {
          drop = true;
          break;
        }
      }
    }
    if (!drop && denylist.drop_unsuccessful) {
      if (entry.response.status < 200 || entry.response.status >= 400) drop = true;
    }
    if (!drop) out.entries.push_back(entry);
  }
  return out;
}

std::optional<QueryLocation> locate_query_entry(const HarArchive& archive,
                                                const CanonicalQuery& q,
                                                const RelevanceOracle& oracle) {
  for (const auto& entry : archive.entries) {
    if (entry.request.body.find(q.text) == std::string::npos) continue;
    if (oracle.classify(entry) != EntryPurpose::LmRequest) continue;
    return QueryLocation{entry.id, "request body contains probe text"};
  }
  return std::nullopt;
}

namespace {

std::string escape_pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

template <typename Fn>
void walk_string_leaves(const json& node, const std::string& prefix, Fn&& fn) {
  if (node.is_string()) {
    fn(prefix, node.get_ref<const std::string&>());
  } else if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it) {
      walk_string_leaves(it.value(), prefix + "/" + escape_pointer_token(it.key()), fn);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      walk_string_leaves(node[i], prefix + "/" + std::to_string(i), fn);
    }
  }
}

bool is_event_stream(const HarEntry& entry) {
  if (util::contains_ci(entry.response.content_type, "event-stream")) return true;
  return entry.response.body.rfind("data:", 0) == 0;
}

// Build the tightest replayable rule for a response whose body carries all
// markers: a single JSON string leaf when one holds everything, the shared
// leaf pointer for chunked event streams, a raw scan otherwise.
model::ExtractionRule build_rule(const HarEntry& entry, const CanonicalQuery& q) {
  model::ExtractionRule rule;
  rule.step_id = "query";
  rule.expected_markers = q.expected_markers;

  if (is_event_stream(entry)) {
    rule.mode = ExtractionMode::SseConcat;
    auto segments = model::sse_data_segments(entry.response.body);
    if (!segments.empty()) {
      json first = json::parse(segments.front(), nullptr, false);
      if (!first.is_discarded()) {
        std::vector<std::string> pointers;
        walk_string_leaves(first, "", [&](const std::string& ptr, const std::string&) {
          pointers.push_back(ptr);
        });
        if (pointers.size() == 1) rule.paths = {pointers.front()};
      }
    }
    return rule;
  }

  json doc = json::parse(entry.response.body, nullptr, false);
  if (!doc.is_discarded()) {
    std::string best;
    walk_string_leaves(doc, "", [&](const std::string& ptr, const std::string& value) {
      if (best.empty() && model::contains_all_markers(value, q.expected_markers)) {
        best = ptr;
      }
    });
    if (!best.empty()) {
      rule.mode = ExtractionMode::JsonPath;
      rule.paths = {best};
      return rule;
    }
  }

  rule.mode = ExtractionMode::SubstringScan;
  return rule;
}

}  // namespace

std::optional<AnswerLocation> locate_answer_entry(const HarArchive& archive,
                                                  const CanonicalQuery& q,
                                                  const std::string& query_entry_id,
                                                  const RelevanceOracle& oracle) {
  int start = archive.index_of(query_entry_id);
  if (start < 0) return std::nullopt;

  for (std::size_t i = static_cast<std::size_t>(start); i < archive.entries.size(); ++i) {
    const auto& entry = archive.entries[i];
    std::string text = entry.response.body;
    if (is_event_stream(entry)) {
      auto segments = model::sse_data_segments(text);
      text.clear();
      for (const auto& s : segments) text += s;
    }
    if (model::contains_all_markers(text, q.expected_markers)) {
      return AnswerLocation{entry.id, build_rule(entry, q), false};
    }
  }

  // Marker scan failed; fall back to an oracle vote over candidates.
  for (std::size_t i = static_cast<std::size_t>(start); i < archive.entries.size(); ++i) {
    const auto& entry = archive.entries[i];
    if (oracle.answer_candidate(entry)) {
      model::ExtractionRule rule;
      rule.step_id = "query";
      rule.mode = ExtractionMode::SubstringScan;
      rule.expected_markers = q.expected_markers;
      return AnswerLocation{entry.id, rule, true};
    }
  }
  return std::nullopt;
}

AuthClassification classify_auth(const HarArchive& archive, const std::string& query_entry_id,
                                 const std::vector<model::Fingerprint>& kb) {
  AuthClassification result;
  const HarEntry* entry = archive.find(query_entry_id);
  if (!entry) {
    result.scheme.variant = AuthVariant::Unknown;
    return result;
  }

  // Known third-party endpoint => no authentication scheme of the app's own;
  // any embedded key is captured as a credential.
  for (const auto& fp : kb) {
    for (const auto& marker : fp.url_markers) {
      if (entry->request.url.find(marker) == std::string::npos) continue;

      result.scheme.variant = AuthVariant::NoAuth;
      const auto& profile = providers::profile_for(fp.provider);
      std::string key;
      std::string header_name = profile.auth_header;
      if (!profile.auth_header.empty()) {
        if (auto value = header_value(entry->request.headers, profile.auth_header)) {
          key = *value;
          if (!profile.auth_value_prefix.empty() &&
              key.rfind(profile.auth_value_prefix, 0) == 0) {
            key = key.substr(profile.auth_value_prefix.size());
          }
        }
      } else if (!profile.key_query_param.empty()) {
        std::string needle = profile.key_query_param + "=";
        auto pos = entry->request.url.find(needle);
        if (pos != std::string::npos) {
          pos += needle.size();
          auto end = entry->request.url.find_first_of("&#", pos);
          key = entry->request.url.substr(pos, end == std::string::npos ? end : end - pos);
          header_name = "url:" + profile.key_query_param;
        }
      }
      if (!key.empty()) {
        result.captured_key = model::Credential{fp.provider, key,
                                                model::CredentialSource::NetworkCapture};
        result.scheme.evidence.push_back({entry->id, header_name, key});
      }
      return result;
    }
  }

  if (auto auth = header_value(entry->request.headers, "authorization")) {
    std::string token = *auth;
    constexpr const char* kBearer = "Bearer ";
    bool has_bearer_prefix = token.rfind(kBearer, 0) == 0;
    if (has_bearer_prefix) token = token.substr(7);

    if (model::looks_like_jwt(token)) {
      result.scheme.variant = AuthVariant::Jwt;
      result.scheme.evidence.push_back({entry->id, "Authorization", token});
      return result;
    }
    if (has_bearer_prefix && !token.empty()) {
      result.scheme.variant = AuthVariant::Bearer;
      result.scheme.evidence.push_back({entry->id, "Authorization", token});
      return result;
    }
  }

  result.scheme.variant = AuthVariant::Unknown;
  return result;
}

std::vector<HarEntry> select_relevant_entries(const HarArchive& archive,
                                              const std::string& query_entry_id,
                                              const AuthClassification& auth,
                                              const std::string& answer_entry_id) {
  std::string token;
  if ((auth.scheme.variant == AuthVariant::Bearer ||
       auth.scheme.variant == AuthVariant::Jwt) &&
      !auth.scheme.evidence.empty()) {
    token = auth.scheme.evidence.front().value;
  }

  std::vector<HarEntry> selected;
  bool token_transmitted = false;
  for (const auto& entry : archive.entries) {
    bool keep = entry.id == query_entry_id || entry.id == answer_entry_id;

    if (!keep && !token.empty()) {
      // Minting or refreshing: the token value first appears in a response.
      if (entry.response.body.find(token) != std::string::npos) keep = true;

      // First transmission of the token on a request.
      if (!keep && !token_transmitted) {
        bool in_request = entry.request.body.find(token) != std::string::npos;
        for (const auto& [name, value] : entry.request.headers) {
          (void)name;
          if (value.find(token) != std::string::npos) in_request = true;
        }
        if (in_request) {
          keep = true;
          token_transmitted = true;
        }
      }
    }
    if (keep) selected.push_back(entry);
  }
  return selected;
}

Tunables extract_tunables(const HarEntry& query_entry, const CanonicalQuery& q,
                          const TunableFieldConfig& config) {
  Tunables tunables;

  json body = json::parse(query_entry.request.body, nullptr, false);
  if (!body.is_discarded()) {
    // Numeric and model fields anywhere in the request body.
    std::function<void(const json&, const std::string&)> walk =
        [&](const json& node, const std::string& prefix) {
          if (node.is_object()) {
            for (auto it = node.begin(); it != node.end(); ++it) {
              std::string ptr = prefix + "/" + escape_pointer_token(it.key());
              if (!tunables.max_tokens && it.value().is_number_integer()) {
                for (const auto& name : config.max_tokens_fields) {
                  if (it.key() == name) {
                    tunables.max_tokens = {ptr, it.value().get<long>()};
                  }
                }
              }
              if (!tunables.model_field && it.value().is_string()) {
                for (const auto& name : config.model_fields) {
                  if (it.key() == name) {
                    tunables.model_field = {ptr, it.value().get<std::string>()};
                  }
                }
              }
              walk(it.value(), ptr);
            }
          } else if (node.is_array()) {
            for (std::size_t i = 0; i < node.size(); ++i) {
              walk(node[i], prefix + "/" + std::to_string(i));
            }
          }
        };
    walk(body, "");

    // A pre-prompt concatenated in front of the canonical query.
    walk_string_leaves(body, "", [&](const std::string& ptr, const std::string& value) {
      if (tunables.preprompt) return;
      auto pos = value.find(q.text);
      if (pos != std::string::npos && pos > 0) {
        tunables.preprompt = PrepromptInfo{PrepromptLocation::AppRequestBody,
                                           value.substr(0, pos), ptr};
      }
    });

    // Or shipped as a dedicated field alongside it.
    if (!tunables.preprompt) {
      walk_string_leaves(body, "", [&](const std::string& ptr, const std::string& value) {
        if (tunables.preprompt || value.empty()) return;
        std::string last = ptr.substr(ptr.rfind('/') + 1);
        for (const auto& name : config.preprompt_fields) {
          if (last == name) {
            tunables.preprompt =
                PrepromptInfo{PrepromptLocation::AppRequestBody, value, ptr};
          }
        }
      });
    }
  }

  // A pre-prompt the server echoes back around the query.
  if (!tunables.preprompt) {
    json response = json::parse(query_entry.response.body, nullptr, false);
    if (!response.is_discarded()) {
      walk_string_leaves(response, "", [&](const std::string& ptr, const std::string& value) {
        if (tunables.preprompt) return;
        auto pos = value.find(q.text);
        if (pos != std::string::npos && pos > 0) {
          tunables.preprompt = PrepromptInfo{PrepromptLocation::ServerEchoedResponse,
                                             value.substr(0, pos), ptr};
        }
      });
    }
  }

  return tunables;
}

}  // namespace lmaudit::har
