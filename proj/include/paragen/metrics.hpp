#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "paragen/vocab.hpp"

namespace paragen {

struct BleuReport {
  double bleu = 0.0;
  std::array<double, 4> precisions{};  // modified n-gram precision, n = 1..4
  double brevity_penalty = 1.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

/// Corpus BLEU with one reference per hypothesis, n = 1..4, uniform weights
/// and clipped counts. With `smoothing`, every order adds one to numerator
/// and denominator. ValidationError on length mismatch or an empty corpus.
/// Sentence statistics are gathered on up to `threads` threads; the result
/// does not depend on the thread count.
BleuReport bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                bool smoothing = false, int threads = 1);

// Positional matches over max(|gold|, 1); hypothesis positions past the end of
// gold are ignored, missing ones count as misses.
template <class T>
double token_accuracy(std::span<const T> hyp, std::span<const T> gold) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size() && i < hyp.size(); ++i) {
    if (hyp[i] == gold[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.empty() ? 1 : gold.size());
}

inline double token_accuracy(const std::vector<std::size_t>& hyp,
                             const std::vector<std::size_t>& gold) {
  return token_accuracy<std::size_t>(hyp, gold);
}
inline double token_accuracy(const TokenList& hyp, const TokenList& gold) {
  return token_accuracy<std::string>(hyp, gold);
}

std::string bleu_to_json(const BleuReport& report);

} // namespace paragen
