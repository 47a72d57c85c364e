#include "paragen/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

// Decodes one code point starting at text[pos]; invalid sequences decode as
// the single raw byte so nothing is lost.
char32_t next_code_point(std::string_view text, std::size_t& pos, std::size_t& length) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  std::size_t need = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    length = 1;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    length = 1;
    return b0;
  }
  if (pos + need >= text.size()) {
    length = 1;
    return b0;
  }
  for (std::size_t k = 1; k <= need; ++k) {
    const auto b = static_cast<unsigned char>(text[pos + k]);
    if ((b & 0xC0) != 0x80) {
      length = 1;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  length = need + 1;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if ((cp == 0x179 || cp == 0x17B || cp == 0x17D)) return cp + 1;
  return cp;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_split_punct(char32_t cp) {
  switch (cp) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '(': case ')': case 0xAB: case 0xBB:
      return true;
    default:
      return false;
  }
}

bool is_reserved_token(std::string_view t) {
  return t == Vocabulary::kPadToken || t == Vocabulary::kUnkToken ||
         t == Vocabulary::kBosToken || t == Vocabulary::kEosToken;
}

} // namespace

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = next_code_point(text, pos, len);
    if (len == 1 && static_cast<unsigned char>(text[pos]) >= 0x80) {
      out.push_back(text[pos]);  // undecodable byte, keep as is
    } else {
      append_utf8(out, lower(cp));
    }
    pos += len;
  }
  return out;
}

TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 0;
    const char32_t cp = next_code_point(text, pos, len);
    const bool raw_byte = len == 1 && static_cast<unsigned char>(text[pos]) >= 0x80;
    if (!raw_byte && is_space(cp)) {
      flush();
    } else if (!raw_byte && is_split_punct(cp)) {
      flush();
      std::string p;
      append_utf8(p, cp);
      tokens.push_back(std::move(p));
    } else if (raw_byte) {
      current.push_back(text[pos]);
    } else {
      append_utf8(current, lower(cp));
    }
    pos += len;
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary()
    : tokens_{std::string(kPadToken), std::string(kUnkToken), std::string(kBosToken),
              std::string(kEosToken)} {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : Vocabulary() {
  tokens_.reserve(kReserved + tokens.size());
  for (auto& t : tokens) {
    if (t.empty() || is_reserved_token(t)) {
      throw ValidationError("vocabulary: invalid token '" + t + "'");
    }
    if (t.find_first_of("\n\r") != std::string::npos) {
      throw ValidationError("vocabulary: token contains a line break");
    }
    if (!index_.emplace(t, tokens_.size()).second) {
      throw ValidationError("vocabulary: duplicate token '" + t + "'");
    }
    tokens_.push_back(std::move(t));
  }
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw ValidationError("vocabulary: id " + std::to_string(id) + " outside size " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) {
    out += tokens_[i];
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    tokens.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write vocabulary file " + path.string());
  out << serialize();
  if (!out) throw ValidationError("failed writing vocabulary file " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read vocabulary file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : serialize()) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

Vocabulary build_vocab(std::span<const TokenList> corpus, std::size_t max_size,
                       std::size_t min_count) {
  if (max_size <= Vocabulary::kReserved) {
    throw ValidationError("build_vocab: max_size must exceed " +
                          std::to_string(Vocabulary::kReserved));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& t : sentence) {
      if (!is_reserved_token(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, count] : counts) {
    if (count >= min_count) ranked.emplace_back(token, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = std::min(ranked.size(), max_size - Vocabulary::kReserved);
  std::vector<std::string> tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(std::move(ranked[i].first));
  return Vocabulary(std::move(tokens));
}

ExtendedVocab::ExtendedVocab(const Vocabulary& base, std::vector<std::string> source_oovs)
    : base_(&base), oovs_(std::move(source_oovs)) {}

std::size_t ExtendedVocab::id(std::string_view token) const {
  if (base_->contains(token)) return base_->id(token);
  for (std::size_t i = 0; i < oovs_.size(); ++i) {
    if (oovs_[i] == token) return base_->size() + i;
  }
  return Vocabulary::kUnk;
}

const std::string& ExtendedVocab::token(std::size_t id) const {
  if (id < base_->size()) return base_->token(id);
  const std::size_t k = id - base_->size();
  if (k >= oovs_.size()) {
    throw ValidationError("extended vocabulary: id " + std::to_string(id) + " outside size " +
                          std::to_string(size()));
  }
  return oovs_[k];
}

SourceEncoding encode_source(std::span<const std::string> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) {
    throw ValidationError("encode_source: empty source sentence");
  }
  std::vector<std::string> oovs;
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (vocab.contains(t)) {
      ids.push_back(vocab.id(t));
      continue;
    }
    auto it = std::find(oovs.begin(), oovs.end(), t);
    if (it == oovs.end()) {
      oovs.push_back(t);
      it = oovs.end() - 1;
    }
    ids.push_back(vocab.size() + static_cast<std::size_t>(it - oovs.begin()));
  }
  return SourceEncoding{std::move(ids), ExtendedVocab(vocab, std::move(oovs))};
}

std::vector<std::size_t> encode_target(std::span<const std::string> tokens,
                                       const ExtendedVocab& ev) {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(ev.id(t));
  return ids;
}

TokenList decode(std::span<const std::size_t> ids, const ExtendedVocab& ev) {
  TokenList out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(ev.token(id));
  return out;
}

} // namespace paragen
