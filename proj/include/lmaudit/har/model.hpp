#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lmaudit::har {

using nlohmann::json;

using HeaderList = std::vector<std::pair<std::string, std::string>>;

/// Case-insensitive header lookup; returns the first match.
std::optional<std::string> header_value(const HeaderList& headers, std::string_view name);

struct HarRequest {
  std::string method;
  std::string url;
  HeaderList headers;
  std::string body;
};

struct HarResponse {
  int status = 0;
  HeaderList headers;
  std::string content_type;
  std::string body;
};

struct HarEntry {
  std::string id;
  std::string started_at;  // ISO 8601; lexicographic order == time order
  HarRequest request;
  HarResponse response;
};

struct HarArchive {
  std::vector<HarEntry> entries;

  const HarEntry* find(std::string_view id) const;
  /// Index of an entry id, or -1.
  int index_of(std::string_view id) const;
};

/// Filter for traffic that cannot be part of an LM interaction.
struct Denylist {
  std::vector<std::string> url_patterns;
  std::vector<std::string> blocked_content_types = {"javascript", "css", "font", "image"};
  bool drop_unsuccessful = true;
};

Denylist default_denylist();
Denylist load_denylist(const std::string& path);

void to_json(json& j, const Denylist& d);
void from_json(const json& j, Denylist& d);

/// The fixed localization probe and the markers its answer must contain.
struct CanonicalQuery {
  std::string text;
  std::vector<std::string> expected_markers;
};

CanonicalQuery default_canonical_query();
CanonicalQuery load_canonical_query(const std::string& path);

void to_json(json& j, const CanonicalQuery& q);
void from_json(const json& j, CanonicalQuery& q);

enum class PrepromptLocation { AppRequestBody, ServerEchoedResponse };

NLOHMANN_JSON_SERIALIZE_ENUM(PrepromptLocation,
                             {{PrepromptLocation::AppRequestBody, "app_request_body"},
                              {PrepromptLocation::ServerEchoedResponse,
                               "server_echoed_response"}})

struct PrepromptInfo {
  PrepromptLocation location = PrepromptLocation::AppRequestBody;
  std::string text;  // verbatim
  std::string path;  // JSON pointer into the located entry

  friend bool operator==(const PrepromptInfo&, const PrepromptInfo&) = default;
};

void to_json(json& j, const PrepromptInfo& p);
void from_json(const json& j, PrepromptInfo& p);

/// Attacker-adjustable knobs discovered in the query request.
struct Tunables {
  std::optional<std::pair<std::string, long>> max_tokens;        // (path, value)
  std::optional<std::pair<std::string, std::string>> model_field;  // (path, value)
  std::optional<PrepromptInfo> preprompt;

  friend bool operator==(const Tunables&, const Tunables&) = default;
};

void to_json(json& j, const Tunables& t);
void from_json(const json& j, Tunables& t);

}  // namespace lmaudit::har
