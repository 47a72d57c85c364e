#include "paragen/corpus.hpp"

#include <algorithm>

#include "paragen/dataset.hpp"

namespace paragen {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Uppercase letter or opening quote at text[pos] (UTF-8).
bool opens_sentence(std::string_view text, std::size_t pos) {
  const auto c = static_cast<unsigned char>(text[pos]);
  if (c >= 'A' && c <= 'Z') return true;
  if (c == '"' || c == '\'') return true;
  if (pos + 1 < text.size()) {
    const auto d = static_cast<unsigned char>(text[pos + 1]);
    // Latin-1 uppercase U+00C0..U+00DE except U+00D7, encoded C3 80..C3 9E.
    if (c == 0xC3 && d >= 0x80 && d <= 0x9E && d != 0x97) return true;
    // U+00AB guillemet.
    if (c == 0xC2 && d == 0xAB) return true;
  }
  if (pos + 2 < text.size() && c == 0xE2 && static_cast<unsigned char>(text[pos + 1]) == 0x80) {
    const auto e = static_cast<unsigned char>(text[pos + 2]);
    // U+2018 and U+201C.
    if (e == 0x98 || e == 0x9C) return true;
  }
  return false;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool is_abbreviation(std::string_view word, std::span<const std::string> abbreviations) {
  const std::string lowered = to_lower_utf8(word);
  for (const auto& a : abbreviations) {
    if (to_lower_utf8(a) == lowered) return true;
  }
  return false;
}

} // namespace

std::vector<std::string> default_abbreviations() {
  return {"sig.",  "sig.ra", "dott.", "dr.",  "prof.", "ing.", "avv.", "on.",  "sen.",
          "mr.",   "mrs.",   "ms.",   "st.",  "sr.",   "jr.",  "vs.",  "ecc.", "etc.",
          "pag.",  "art.",   "n.",    "no.",  "fig.",  "gen.", "col.", "cap.", "e.g.",
          "i.e.",  "p.es.",  "s.p.a.", "spa.", "inc.", "ltd.", "co."};
}

std::vector<std::string> load_abbreviations(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& line : read_lines(path)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed = collapse_whitespace(line);
    if (!trimmed.empty()) out.push_back(std::move(trimmed));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text,
                                         std::span<const std::string> abbreviations) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && is_terminal(text[end])) ++end;
    std::size_t next = end;
    while (next < text.size() && is_ascii_space(text[next])) ++next;
    const bool boundary = next > end && next < text.size() && opens_sentence(text, next);
    if (boundary && text[end - 1] == '.' && end - i == 1) {
      std::size_t word_start = i;
      while (word_start > start && !is_ascii_space(text[word_start - 1])) --word_start;
      if (is_abbreviation(text.substr(word_start, end - word_start), abbreviations)) {
        i = end;
        continue;
      }
    }
    if (boundary) {
      std::string s = collapse_whitespace(text.substr(start, end - start));
      if (!s.empty()) sentences.push_back(std::move(s));
      start = next;
    }
    i = end;
  }
  std::string tail = collapse_whitespace(text.substr(start));
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

std::vector<std::string> segment(const Document& doc, const SegmenterConfig& cfg) {
  std::vector<std::string> kept;
  for (auto& s : split_sentences(doc.body, cfg.abbreviations)) {
    const std::size_t n = tokenize(s).size();
    if (n >= cfg.min_tokens && n <= cfg.max_tokens) kept.push_back(std::move(s));
  }
  return kept;
}

} // namespace paragen
