#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace lmaudit::util {

std::string ascii_lower(std::string_view text);
bool contains_ci(std::string_view haystack, std::string_view needle);

struct UrlParts {
  std::string scheme;
  std::string host;
  int port = 0;  // 0 when absent
  std::string path_and_query;

  std::string host_port() const;  // "host" or "host:port"
  std::string base() const;       // "scheme://host[:port]"
};

std::optional<UrlParts> parse_url(std::string_view url);

std::string base64_decode(std::string_view input);
std::string base64_encode(std::string_view input);
std::string base64url_encode(std::string_view input);
bool is_valid_utf8(std::string_view text);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t value);

/// 32 hex characters derived deterministically from the input.
std::string hex32_of(std::string_view seed);

/// Millisecond-resolution ISO 8601 UTC timestamp, e.g. 2024-01-01T00:00:00.000Z.
std::string iso_timestamp(std::int64_t ms_since_epoch);

std::string read_file(const std::filesystem::path& path);

/// Write via a temp file in the same directory, then rename into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Deterministic generator for fixture content (split-mix style).
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}
  explicit DeterministicRng(std::string_view seed) : state_(fnv1a(seed)) {}

  std::uint64_t next();
  std::uint64_t next_below(std::uint64_t bound);  // bound > 0
  std::string token(std::string_view alphabet, std::size_t length);
  std::string alnum(std::size_t length);
  std::string hex(std::size_t length);

 private:
  std::uint64_t state_;
};

}  // namespace lmaudit::util
