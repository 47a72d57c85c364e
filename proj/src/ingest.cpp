#include "paragen/ingest.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "paragen/dataset.hpp"
#include "paragen/errors.hpp"

namespace paragen {

Document parse_document_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("document must be a JSON object");
  auto field = [&](const char* name) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_string()) {
      throw ValidationError(std::string("document field '") + name + "' missing or not a string");
    }
    return it->get<std::string>();
  };
  Document d;
  d.id = field("id");
  d.source = field("source");
  d.title = field("title");
  d.body = field("body");
  d.timestamp = field("timestamp");
  if (d.id.empty()) throw ValidationError("document id is empty");
  return d;
}

std::string document_to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["source"] = doc.source;
  j["title"] = doc.title;
  j["body"] = doc.body;
  j["timestamp"] = doc.timestamp;
  return j.dump(2) + "\n";
}

IngestReport ingest_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw ValidationError("document directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  IngestReport report;
  std::set<std::string> ids;
  for (const auto& path : files) {
    Document doc;
    try {
      doc = parse_document_json(read_file(path));
    } catch (const ValidationError& e) {
      report.warnings.push_back("skipping " + path.string() + ": " + e.what());
      continue;
    }
    if (doc.body.find_first_not_of(" \t\r\n") == std::string::npos) {
      report.warnings.push_back("skipping " + path.string() + ": empty body");
      continue;
    }
    if (!ids.insert(doc.id).second) {
      report.warnings.push_back("skipping " + path.string() + ": duplicate id '" + doc.id + "'");
      continue;
    }
    report.documents.push_back(std::move(doc));
  }
  std::sort(report.documents.begin(), report.documents.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  return report;
}

} // namespace paragen
