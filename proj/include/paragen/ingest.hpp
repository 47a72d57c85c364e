#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paragen/corpus.hpp"

namespace paragen {

struct IngestReport {
  std::vector<Document> documents;  // sorted by id
  std::vector<std::string> warnings;
};

// Local document schema: JSON object with string fields id, source, title,
// body, timestamp. Throws ValidationError naming the missing/bad field.
Document parse_document_json(std::string_view text);
std::string document_to_json(const Document& doc);

/// Reads every *.json file of a directory. Unreadable or malformed files,
/// empty bodies and repeated ids are skipped with a warning naming the path.
IngestReport ingest_directory(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Fetch mode.

// Visible text of an HTML page: script/style/head dropped, block elements
// become line breaks, entities decoded, whitespace collapsed per line, empty
// lines removed.
std::string strip_html(std::string_view html);
std::string extract_title(std::string_view html);

/// robots.txt rules for one user agent (the most specific matching group, or
/// "*"). Longest matching prefix wins; Allow wins ties.
class RobotsRules {
 public:
  static RobotsRules parse(std::string_view text, std::string_view user_agent);
  bool allowed(std::string_view path) const;

 private:
  std::vector<std::string> allow_;
  std::vector<std::string> disallow_;
};

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;  // includes query, starts with '/'
  std::string origin() const;  // scheme://host:port
};
// Throws ValidationError for anything but http(s)://host[:port][/path].
Url parse_url(std::string_view url);

// "Sun, 06 Nov 1994 08:49:37 GMT" -> "1994-11-06T08:49:37Z"; empty when the
// input does not parse.
std::string http_date_to_iso8601(std::string_view http_date);

Document document_from_html(std::string_view url, std::string_view html,
                            std::string timestamp);

struct FetchConfig {
  double min_interval_seconds = 1.0;  // per host
  std::string user_agent = "paragen-ingest/1.0";
  std::size_t workers = 4;
  int timeout_seconds = 10;
  bool respect_robots = true;
};

/// Fetches each URL with HTTP GET. Hosts are processed by a bounded worker
/// pool, one worker per host at a time, with at least min_interval_seconds
/// between requests to the same host. Failed or disallowed URLs are skipped
/// with a warning.
IngestReport ingest_urls(std::span<const std::string> urls, const FetchConfig& cfg = {});

} // namespace paragen
