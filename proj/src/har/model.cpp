#include "lmaudit/har/model.hpp"

#include "lmaudit/model/error.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::har {

std::optional<std::string> header_value(const HeaderList& headers, std::string_view name) {
  std::string wanted = util::ascii_lower(name);
  for (const auto& [key, value] : headers) {
    if (util::ascii_lower(key) == wanted) return value;
  }
  return std::nullopt;
}

const HarEntry* HarArchive::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

int HarArchive::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

Denylist default_denylist() {
  Denylist d;
  // Common analytics/ads/telemetry hosts seen in app traffic. Extend via a
  // denylist config file for app-specific noise.
  d.url_patterns = {
      "google-analytics.com", "analytics.",      "doubleclick.net",
      "googlesyndication",    "app-measurement.com", "crashlytics",
      "firebaselogging",      "adservice.",      "graph.facebook.com",
      "sentry.io",            "ads.",            "cdn.ampproject.org",
  };
  return d;
}

Denylist load_denylist(const std::string& path) {
  json j = json::parse(util::read_file(path));
  return j.get<Denylist>();
}

void to_json(json& j, const Denylist& d) {
  j = json{{"url_patterns", d.url_patterns},
           {"blocked_content_types", d.blocked_content_types},
           {"drop_unsuccessful", d.drop_unsuccessful}};
}

void from_json(const json& j, Denylist& d) {
  d = Denylist{};
  j.at("url_patterns").get_to(d.url_patterns);
  j.at("blocked_content_types").get_to(d.blocked_content_types);
  j.at("drop_unsuccessful").get_to(d.drop_unsuccessful);
}

CanonicalQuery default_canonical_query() {
  CanonicalQuery q;
  q.text = "Tell only in three words, the capital of France, Japan, Brazil.";
  q.expected_markers = {"Paris", "Tokyo", "Brasília"};
  return q;
}

CanonicalQuery load_canonical_query(const std::string& path) {
  json j = json::parse(util::read_file(path));
  return j.get<CanonicalQuery>();
}

void to_json(json& j, const CanonicalQuery& q) {
  j = json{{"text", q.text}, {"expected_markers", q.expected_markers}};
}

void from_json(const json& j, CanonicalQuery& q) {
  j.at("text").get_to(q.text);
  j.at("expected_markers").get_to(q.expected_markers);
  if (q.text.empty() || q.expected_markers.empty()) {
    throw ValidationError("canonical query needs text and markers");
  }
}

void to_json(json& j, const PrepromptInfo& p) {
  j = json{{"location", p.location}, {"text", p.text}, {"path", p.path}};
}

void from_json(const json& j, PrepromptInfo& p) {
  j.at("location").get_to(p.location);
  j.at("text").get_to(p.text);
  j.at("path").get_to(p.path);
}

void to_json(json& j, const Tunables& t) {
  j = json::object();
  if (t.max_tokens) {
    j["max_tokens"] = json{{"path", t.max_tokens->first}, {"value", t.max_tokens->second}};
  }
  if (t.model_field) {
    j["model_field"] = json{{"path", t.model_field->first}, {"value", t.model_field->second}};
  }
  if (t.preprompt) j["preprompt"] = *t.preprompt;
}

void from_json(const json& j, Tunables& t) {
  t = Tunables{};
  if (j.contains("max_tokens")) {
    t.max_tokens = {j.at("max_tokens").at("path").get<std::string>(),
                    j.at("max_tokens").at("value").get<long>()};
  }
  if (j.contains("model_field")) {
    t.model_field = {j.at("model_field").at("path").get<std::string>(),
                     j.at("model_field").at("value").get<std::string>()};
  }
  if (j.contains("preprompt")) t.preprompt = j.at("preprompt").get<PrepromptInfo>();
}

}  // namespace lmaudit::har
