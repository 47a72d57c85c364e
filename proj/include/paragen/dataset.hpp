#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace paragen {

struct Provenance {
  std::size_t x_sentence = 0;
  std::size_t y_sentence = 0;
  std::string x_source;
  std::string y_source;
  std::string x_document;
  std::string y_document;
};

/// Aligned (x, y) pair where y is taken as a paraphrase of x.
struct SentencePair {
  std::string x;
  std::string y;
  double similarity = 1.0;
  std::optional<Provenance> provenance;
};

// Training TSV: "source<TAB>target" per line, LF endings. A line with any
// other number of tabs is rejected with its 1-based line number. Empty lines
// are skipped; a trailing CR is dropped.
std::vector<SentencePair> parse_pairs_tsv(std::string_view text);
std::vector<SentencePair> read_pairs_tsv(const std::filesystem::path& path);
std::string format_pairs_tsv(std::span<const SentencePair> pairs);
void write_pairs_tsv(const std::filesystem::path& path, std::span<const SentencePair> pairs);

// One JSON object per line with similarity and provenance.
std::string format_provenance_jsonl(std::span<const SentencePair> pairs);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Lines without their terminators; a final empty line is not reported.
std::vector<std::string> read_lines(const std::filesystem::path& path);

} // namespace paragen
