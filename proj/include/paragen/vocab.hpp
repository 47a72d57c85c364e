#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace paragen {

using TokenList = std::vector<std::string>;

// Lowercases, splits on Unicode whitespace and separates . , ; : ! ? " ( ) « »
// into standalone tokens. Apostrophes stay inside words.
TokenList tokenize(std::string_view text);

// Lowercase mapping for ASCII, Latin-1 and Latin Extended-A; other code
// points pass through unchanged.
std::string to_lower_utf8(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;
  static constexpr std::size_t kReserved = 4;

  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";

  // Reserved ids only.
  Vocabulary();
  // `tokens` are the non-reserved entries in id order (first gets id 4).
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::size_t id) const;
  static bool is_special(std::size_t id) { return id < kReserved; }

  // Vocab file: one non-reserved token per line, LF terminated.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);
  // FNV-1a 64 of serialize().
  std::uint64_t fingerprint() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps the most frequent tokens (count >= min_count), ties broken
/// lexicographically, at most max_size entries including the reserved four.
Vocabulary build_vocab(std::span<const TokenList> corpus, std::size_t max_size,
                       std::size_t min_count = 1);

/// Fixed vocabulary plus the distinct OOV tokens of one source sentence, in
/// first-occurrence order, addressed as ids size()..size()+oovs-1.
///
/// Holds a pointer to the base vocabulary, which must outlive it.
class ExtendedVocab {
 public:
  ExtendedVocab() = default;
  ExtendedVocab(const Vocabulary& base, std::vector<std::string> source_oovs);

  const Vocabulary& base() const { return *base_; }
  std::size_t fixed_size() const { return base_->size(); }
  std::size_t size() const { return base_->size() + oovs_.size(); }
  const std::vector<std::string>& source_oovs() const { return oovs_; }

  // Fixed id, extended id, or UNK when the token is in neither.
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const;
  bool is_extended(std::size_t id) const { return id >= fixed_size(); }

 private:
  const Vocabulary* base_ = nullptr;
  std::vector<std::string> oovs_;
};

struct SourceEncoding {
  std::vector<std::size_t> ids;
  ExtendedVocab vocab;
};

// Throws ValidationError on an empty token list.
SourceEncoding encode_source(std::span<const std::string> tokens, const Vocabulary& vocab);

// In-vocab -> fixed id; OOV present in the source -> extended id; else UNK.
std::vector<std::size_t> encode_target(std::span<const std::string> tokens,
                                       const ExtendedVocab& ev);

// Inverse of encode_source: every id mapped back to its surface token.
TokenList decode(std::span<const std::size_t> ids, const ExtendedVocab& ev);

// Row of the embedding table used for an id: extended ids share the UNK row.
inline std::size_t embedding_row(std::size_t id, std::size_t fixed_size) {
  return id < fixed_size ? id : Vocabulary::kUnk;
}

} // namespace paragen
