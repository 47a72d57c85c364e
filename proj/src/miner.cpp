#include "paragen/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

#include <omp.h>

#include "paragen/errors.hpp"

namespace paragen {

void MineConfig::validate() const {
  if (k == 0) throw ValidationError("mine: k must be at least 1");
  if (!(min_sim >= 0.0 && max_sim <= 1.0 && min_sim <= max_sim)) {
    throw ValidationError("mine: similarity band must satisfy 0 <= min_sim <= max_sim <= 1");
  }
  if (segmenter.min_tokens > segmenter.max_tokens) {
    throw ValidationError("mine: min_tokens exceeds max_tokens");
  }
  if (threads < 1) throw ValidationError("mine: threads must be at least 1");
}

MineResult align(std::span<const Document> corpus, const MineConfig& cfg) {
  cfg.validate();
  std::set<std::string> sources;
  for (const auto& d : corpus) sources.insert(d.source);
  if (sources.size() < 2) {
    throw ValidationError("mine: alignment needs documents from at least two distinct sources, found " +
                          std::to_string(sources.size()));
  }

  std::vector<const Document*> docs;
  for (const auto& d : corpus) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(),
            [](const Document* a, const Document* b) { return a->id < b->id; });

  std::vector<SentenceRecord> records;
  for (const Document* d : docs) {
    for (auto& text : segment(*d, cfg.segmenter)) {
      SentenceRecord r;
      r.document_id = d->id;
      r.source = d->source;
      r.tokens = tokenize(text);
      r.text = std::move(text);
      records.push_back(std::move(r));
    }
  }
  MineResult result;
  result.documents = docs.size();
  if (records.empty()) return result;

  const InvertedIndex index = InvertedIndex::build(std::move(records));
  const auto& sentences = index.sentences();
  result.sentences = sentences.size();

  std::vector<std::vector<Match>> neighbours(sentences.size());
  const auto n = static_cast<std::int64_t>(sentences.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(cfg.threads) if (cfg.threads > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    neighbours[s] = query_similar(sentences[s], index, cfg.k);
  }

  std::set<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < neighbours.size(); ++i) {
    for (const Match& m : neighbours[i]) {
      candidates.emplace(std::min(i, m.sentence), std::max(i, m.sentence));
    }
  }
  for (const auto& [lo, hi] : candidates) {
    const SentenceRecord& a = sentences[lo];
    const SentenceRecord& b = sentences[hi];
    const double sim = std::clamp(sparse_dot(a.weights, b.weights), 0.0, 1.0);
    if (sim < cfg.min_sim || sim > cfg.max_sim) continue;
    SentencePair pair;
    pair.x = a.text;
    pair.y = b.text;
    pair.similarity = sim;
    pair.provenance = Provenance{lo, hi, a.source, b.source, a.document_id, b.document_id};
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

} // namespace paragen
