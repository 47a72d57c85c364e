#include "paragen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

SparseVector weigh_counts(const std::map<std::uint32_t, std::size_t>& counts,
                          const std::vector<std::vector<Posting>>& postings, std::size_t n) {
  SparseVector v;
  v.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [term, tf] : counts) {
    const double df = static_cast<double>(postings[term].size());
    const double w = (1.0 + std::log(static_cast<double>(tf))) *
                     std::log(1.0 + static_cast<double>(n) / df);
    v.emplace_back(term, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double norm = std::sqrt(sq);
    for (auto& [term, w] : v) w /= norm;
  }
  return v;
}

} // namespace

InvertedIndex InvertedIndex::build(std::vector<SentenceRecord> sentences) {
  InvertedIndex index;
  for (auto& s : sentences) {
    if (!s.tokens.empty()) index.sentences_.push_back(std::move(s));
  }
  if (index.sentences_.empty()) {
    throw ValidationError("build_index: no sentence with tokens");
  }
  for (std::size_t i = 0; i < index.sentences_.size(); ++i) index.sentences_[i].id = i;

  std::vector<std::string> terms;
  for (const auto& s : index.sentences_) terms.insert(terms.end(), s.tokens.begin(), s.tokens.end());
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  index.terms_ = std::move(terms);
  for (std::size_t t = 0; t < index.terms_.size(); ++t) {
    index.term_ids_.emplace(index.terms_[t], static_cast<std::uint32_t>(t));
  }

  std::vector<std::map<std::uint32_t, std::size_t>> counts(index.sentences_.size());
  index.postings_.assign(index.terms_.size(), {});
  for (std::size_t i = 0; i < index.sentences_.size(); ++i) {
    for (const auto& tok : index.sentences_[i].tokens) ++counts[i][index.term_ids_.at(tok)];
    // Placeholder weights so df is known before weighting.
    for (const auto& [term, tf] : counts[i]) index.postings_[term].push_back({i, 0.0});
  }
  const std::size_t n = index.sentences_.size();
  for (std::size_t i = 0; i < n; ++i) {
    index.sentences_[i].weights = weigh_counts(counts[i], index.postings_, n);
  }
  // Fill in posting weights; each list is already in sentence order.
  std::vector<std::size_t> cursor(index.terms_.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [term, w] : index.sentences_[i].weights) {
      index.postings_[term][cursor[term]++].weight = w;
    }
  }
  return index;
}

std::optional<std::uint32_t> InvertedIndex::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

SparseVector InvertedIndex::weigh(std::span<const std::string> tokens) const {
  std::map<std::uint32_t, std::size_t> counts;
  for (const auto& tok : tokens) {
    if (auto id = term_id(tok)) ++counts[*id];
  }
  return weigh_counts(counts, postings_, sentences_.size());
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      acc += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return acc;
}

std::vector<Match> query_similar(const SentenceRecord& ref, const InvertedIndex& index,
                                 std::size_t k) {
  if (k == 0) throw ValidationError("query_similar: k must be at least 1");
  const auto& sentences = index.sentences();
  std::vector<double> scores(sentences.size(), 0.0);
  std::vector<char> seen(sentences.size(), 0);
  std::vector<std::size_t> touched;
  // Term order matches a dense dot product taken over ascending term ids.
  for (const auto& [term, w] : ref.weights) {
    for (const Posting& p : index.postings(term)) {
      if (!seen[p.sentence]) {
        seen[p.sentence] = 1;
        touched.push_back(p.sentence);
      }
      scores[p.sentence] += w * p.weight;
    }
  }
  std::vector<Match> matches;
  for (std::size_t s : touched) {
    // Same-source exclusion also removes the reference itself.
    if (sentences[s].source == ref.source) continue;
    if (scores[s] > 0.0) matches.push_back({s, scores[s]});
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    return a.cosine > b.cosine || (a.cosine == b.cosine && a.sentence < b.sentence);
  });
  if (matches.size() > k) matches.resize(k);
  return matches;
}

} // namespace paragen
