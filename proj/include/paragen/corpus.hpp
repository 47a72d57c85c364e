#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paragen/dataset.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

struct Document {
  std::string id;
  std::string source;  // outlet / site identifier
  std::string title;
  std::string body;
  std::string timestamp;  // ISO-8601

  bool operator==(const Document&) const = default;
};

std::vector<std::string> default_abbreviations();
// One abbreviation per line (with its trailing period); '#' starts a comment.
std::vector<std::string> load_abbreviations(const std::filesystem::path& path);

struct SegmenterConfig {
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 60;
  std::vector<std::string> abbreviations = default_abbreviations();
};

// Raw split: a boundary follows a run of [.!?] when whitespace and then an
// uppercase letter or an opening quote come next, unless the word ending in
// '.' is a listed abbreviation (compared case-insensitively). Returned
// sentences have their whitespace collapsed to single spaces.
std::vector<std::string> split_sentences(std::string_view text,
                                         std::span<const std::string> abbreviations);

// split_sentences on the body, then drops sentences outside the token bounds.
std::vector<std::string> segment(const Document& doc, const SegmenterConfig& cfg = {});

// (term id, weight) sorted by term id.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct SentenceRecord {
  std::size_t id = 0;
  std::string document_id;
  std::string source;
  std::string text;
  TokenList tokens;
  SparseVector weights;  // unit L2 norm once indexed
};

struct Posting {
  std::size_t sentence;
  double weight;
};

/// Term -> postings index over L2-normalized (1 + ln tf) * ln(1 + N / df)
/// sentence vectors. Terms are numbered in lexicographic order and postings
/// are sorted by sentence id.
class InvertedIndex {
 public:
  // Records with no tokens are dropped; survivors are renumbered 0..N-1 in
  // their given order. Throws ValidationError when nothing survives.
  static InvertedIndex build(std::vector<SentenceRecord> sentences);

  const std::vector<SentenceRecord>& sentences() const { return sentences_; }
  std::size_t corpus_size() const { return sentences_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  std::optional<std::uint32_t> term_id(std::string_view term) const;
  std::size_t document_frequency(std::uint32_t term) const { return postings_[term].size(); }
  std::span<const Posting> postings(std::uint32_t term) const { return postings_[term]; }

  // Weights an arbitrary token list against this index; unknown terms drop.
  SparseVector weigh(std::span<const std::string> tokens) const;

 private:
  std::vector<SentenceRecord> sentences_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<std::vector<Posting>> postings_;
};

struct Match {
  std::size_t sentence;
  double cosine;
  bool operator==(const Match&) const = default;
};

/// Exact top-k by cosine, scored term-at-a-time. Candidates sharing the
/// reference's source, the reference itself and zero scores are excluded;
/// ties go to the lower sentence id.
std::vector<Match> query_similar(const SentenceRecord& ref, const InvertedIndex& index,
                                 std::size_t k);

// Sparse dot product of two term-sorted vectors.
double sparse_dot(const SparseVector& a, const SparseVector& b);

struct MineConfig {
  std::size_t k = 3;
  double min_sim = 0.5;
  double max_sim = 0.95;
  SegmenterConfig segmenter;
  int threads = 1;

  void validate() const;
};

struct MineResult {
  std::vector<SentencePair> pairs;
  std::size_t documents = 0;
  std::size_t sentences = 0;
};

/// Segments and indexes every document (ordered by id), queries each sentence
/// for its k nearest other-source neighbours and keeps the pairs whose
/// similarity falls inside [min_sim, max_sim]. Pairs are deduplicated,
/// oriented lower sentence id first and sorted. References are queried in
/// parallel when threads > 1; the output does not depend on it.
///
/// Throws ValidationError unless at least two distinct sources are present.
MineResult align(std::span<const Document> corpus, const MineConfig& cfg);

} // namespace paragen
