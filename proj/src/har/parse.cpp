#include "lmaudit/har/parse.hpp"

#include <algorithm>
#include <cstdio>

#include "lmaudit/model/error.hpp"
#include "lmaudit/util.hpp"

namespace lmaudit::har {

namespace {

HeaderList parse_headers(const json& node) {
  HeaderList headers;
  if (!node.is_array()) return headers;
  for (const auto& h : node) {
    if (h.contains("name") && h.contains("value")) {
      headers.emplace_back(h.at("name").get<std::string>(), h.at("value").get<std::string>());
    }
  }
  return headers;
}

json headers_to_json(const HeaderList& headers) {
  json out = json::array();
  for (const auto& [name, value] : headers) {
    out.push_back(json{{"name", name}, {"value", value}});
  }
  return out;
}

}  // namespace

HarArchive parse_har(const std::string& document, std::vector<std::string>* warnings) {
  json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ParseError("document is not valid JSON");
  if (!doc.contains("log") || !doc["log"].contains("entries") ||
      !doc["log"]["entries"].is_array()) {
    throw ParseError("document has no log.entries array");
  }

  HarArchive archive;
  const auto& entries = doc["log"]["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& node = entries[i];
    auto warn = [&](const std::string& what) {
      if (warnings) {
        warnings->push_back("entry " + std::to_string(i) + " skipped: " + what);
      }
    };

    if (!node.is_object()) {
      warn("not an object");
      continue;
    }
    if (!node.contains("request") || !node.contains("response")) {
      warn("missing request or response");
      continue;
    }
    const auto& request = node["request"];
    const auto& response = node["response"];
    if (!request.contains("method") || !request.contains("url")) {
      warn("request missing method or url");
      continue;
    }
    if (!response.contains("status")) {
      warn("response missing status");
      continue;
    }

    HarEntry entry;
    entry.started_at = node.value("startedDateTime", "");
    entry.request.method = request.at("method").get<std::string>();
    entry.request.url = request.at("url").get<std::string>();
    entry.request.headers = parse_headers(request.value("headers", json::array()));
    if (request.contains("postData") && request["postData"].contains("text")) {
      entry.request.body = request["postData"]["text"].get<std::string>();
    }

    entry.response.status = response.at("status").get<int>();
    entry.response.headers = parse_headers(response.value("headers", json::array()));
    if (response.contains("content")) {
      const auto& content = response["content"];
      entry.response.content_type = content.value("mimeType", "");
      std::string text = content.value("text", "");
      if (content.value("encoding", "") == "base64") {
        text = util::base64_decode(text);
      }
      entry.response.body = std::move(text);
    }
    if (entry.response.content_type.empty()) {
      entry.response.content_type =
          header_value(entry.response.headers, "content-type").value_or("");
    }

    archive.entries.push_back(std::move(entry));
  }

  std::stable_sort(archive.entries.begin(), archive.entries.end(),
                   [](const HarEntry& a, const HarEntry& b) {
                     return a.started_at < b.started_at;
                   });
  for (std::size_t i = 0; i < archive.entries.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "e%04zu", i);
    archive.entries[i].id = buf;
  }
  return archive;
}

json entry_to_har_json(const HarEntry& entry) {
  json request = {
      {"method", entry.request.method},
      {"url", entry.request.url},
      {"httpVersion", "HTTP/1.1"},
      {"headers", headers_to_json(entry.request.headers)},
      {"queryString", json::array()},
      {"cookies", json::array()},
      {"headersSize", -1},
      {"bodySize", static_cast<int>(entry.request.body.size())},
  };
  if (!entry.request.body.empty()) {
    std::string mime = header_value(entry.request.headers, "content-type")
                           .value_or("application/json");
    request["postData"] = json{{"mimeType", mime}, {"text", entry.request.body}};
  }

  json content{{"size", static_cast<int>(entry.response.body.size())},
               {"mimeType", entry.response.content_type}};
  if (util::is_valid_utf8(entry.response.body)) {
    content["text"] = entry.response.body;
  } else {
    content["text"] = util::base64_encode(entry.response.body);
    content["encoding"] = "base64";
  }

  json response = {
      {"status", entry.response.status},
      {"statusText", ""},
      {"httpVersion", "HTTP/1.1"},
      {"headers", headers_to_json(entry.response.headers)},
      {"cookies", json::array()},
      {"content", content},
      {"redirectURL", ""},
      {"headersSize", -1},
      {"bodySize", static_cast<int>(entry.response.body.size())},
  };

  return json{{"startedDateTime", entry.started_at},
              {"time", 0},
              {"request", request},
              {"response", response},
              {"cache", json::object()},
              {"timings", json{{"send", 0}, {"wait", 0}, {"receive", 0}}}};
}

std::string make_har_document(const std::vector<HarEntry>& entries) {
  json log_entries = json::array();
  for (const auto& e : entries) log_entries.push_back(entry_to_har_json(e));
  json doc = {{"log",
               {{"version", "1.2"},
                {"creator", {{"name", "lmaudit"}, {"version", "1.0"}}},
                {"entries", log_entries}}}};
  return doc.dump(2) + "\n";
}

}  // namespace lmaudit::har
