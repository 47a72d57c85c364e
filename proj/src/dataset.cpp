#include "paragen/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of("\t\n\r") != std::string::npos) {
    throw ValidationError(std::string("pair ") + what + " contains a tab or line break");
  }
}

} // namespace

std::vector<SentencePair> parse_pairs_tsv(std::string_view text) {
  std::vector<SentencePair> pairs;
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = lines[n];
    if (line.empty()) continue;
    const std::size_t tabs = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t'));
    if (tabs != 1) {
      throw ValidationError("dataset line " + std::to_string(n + 1) + ": expected exactly one tab, found " +
                            std::to_string(tabs));
    }
    const std::size_t tab = line.find('\t');
    SentencePair p;
    p.x = std::string(line.substr(0, tab));
    p.y = std::string(line.substr(tab + 1));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<SentencePair> read_pairs_tsv(const std::filesystem::path& path) {
  return parse_pairs_tsv(read_file(path));
}

std::string format_pairs_tsv(std::span<const SentencePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    check_field(p.x, "source");
    check_field(p.y, "target");
    out += p.x;
    out += '\t';
    out += p.y;
    out += '\n';
  }
  return out;
}

void write_pairs_tsv(const std::filesystem::path& path, std::span<const SentencePair> pairs) {
  write_file(path, format_pairs_tsv(pairs));
}

std::string format_provenance_jsonl(std::span<const SentencePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["similarity"] = p.similarity;
    if (p.provenance) {
      const Provenance& v = *p.provenance;
      j["x_sentence"] = v.x_sentence;
      j["y_sentence"] = v.y_sentence;
      j["x_source"] = v.x_source;
      j["y_source"] = v.y_source;
      j["x_document"] = v.x_document;
      j["y_document"] = v.y_document;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> lines;
  for (auto l : split_lines(text)) lines.emplace_back(l);
  return lines;
}

} // namespace paragen
