#include "lmaudit/model/extraction.hpp"

#include <cctype>

#include <json.hpp>

namespace lmaudit::model {

namespace {

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Resolve a JSON pointer to a string value; numbers are stringified.
bool pointer_value(const nlohmann::json& doc, const std::string& pointer, std::string* out) {
  nlohmann::json::json_pointer ptr;
  try {
    ptr = nlohmann::json::json_pointer(pointer);
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (!doc.contains(ptr)) return false;
  const auto& value = doc.at(ptr);
  if (value.is_string()) {
    *out = value.get<std::string>();
  } else if (value.is_number() || value.is_boolean()) {
    *out = value.dump();
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> sse_data_segments(std::string_view body) {
  std::vector<std::string> segments;
  std::vector<std::string> current;

  std::size_t pos = 0;
  auto flush = [&] {
    if (current.empty()) return;
    std::string joined;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (i > 0) joined += '\n';
      joined += current[i];
    }
    segments.push_back(std::move(joined));
    current.clear();
  };

  while (pos <= body.size()) {
    std::size_t eol = body.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? body.substr(pos)
                                : body.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      flush();  // blank line terminates an event
    } else if (line.rfind("data:", 0) == 0) {
      std::string_view value = line.substr(5);
      if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      current.emplace_back(value);
    }
    // event:/id:/retry:/comment lines carry no answer text

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush();
  return segments;
}

bool contains_all_markers(std::string_view text, const std::vector<std::string>& markers) {
  if (markers.empty()) return false;
  std::string haystack = ascii_lower(text);
  for (const auto& marker : markers) {
    if (haystack.find(ascii_lower(marker)) == std::string::npos) return false;
  }
  return true;
}

Extraction apply_extraction(const ExtractionRule& rule, std::string_view body) {
  Extraction result;

  switch (rule.mode) {
    case ExtractionMode::SubstringScan: {
      result.parsed = true;
      result.text = std::string(body);
      break;
    }
    case ExtractionMode::JsonPath: {
      nlohmann::json doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded()) {
        result.error = "response body is not valid JSON";
        return result;
      }
      std::string combined;
      for (const auto& path : rule.paths) {
        std::string value;
        if (!pointer_value(doc, path, &value)) {
          result.error = "path '" + path + "' not found in response";
          return result;
        }
        if (!combined.empty()) combined += ' ';
        combined += value;
      }
      if (rule.paths.empty()) {
        result.error = "json_path rule has no paths";
        return result;
      }
      result.parsed = true;
      result.text = std::move(combined);
      break;
    }
    case ExtractionMode::SseConcat: {
      auto segments = sse_data_segments(body);
      if (segments.empty()) {
        result.error = "no event-stream data segments in response";
        return result;
      }
      std::string combined;
      for (const auto& segment : segments) {
        std::string piece = segment;
        if (!rule.paths.empty()) {
          nlohmann::json doc =
              nlohmann::json::parse(segment, nullptr, /*allow_exceptions=*/false);
          if (!doc.is_discarded()) {
            for (const auto& path : rule.paths) {
              std::string value;
              if (pointer_value(doc, path, &value)) {
                piece = value;
                break;
              }
            }
          }
        }
        combined += piece;
      }
      result.parsed = true;
      result.text = std::move(combined);
      break;
    }
  }

  result.matched = contains_all_markers(result.text, rule.expected_markers);
  return result;
}

}  // namespace lmaudit::model
