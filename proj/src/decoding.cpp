#include "paragen/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

SourceEncoding encode_text(std::string_view text, const Vocabulary& vocab) {
  const TokenList tokens = tokenize(text);
  if (tokens.empty()) throw ValidationError("decode: empty source sentence");
  return encode_source(tokens, vocab);
}

std::size_t argmax(const Tensor& p) {
  std::size_t best = 0;
  for (std::size_t w = 1; w < p.size(); ++w) {
    if (p[w] > p[best]) best = w;
  }
  return best;
}

// Indices of the k largest entries, larger first, ties to the lower index.
std::vector<std::size_t> top_k(const Tensor& p, std::size_t k) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return p[a] > p[b] || (p[a] == p[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

struct Encoded {
  EncoderStates states;
  DecoderState start;
};

Encoded run_encoder(const SourceEncoding& source, const ModelParams& params) {
  Encoded e;
  e.states = encode_ids(source.ids, params);
  e.start = initial_state(e.states, params);
  return e;
}

} // namespace

void BeamConfig::validate() const {
  if (beam_width < 1) throw ValidationError("beam width must be at least 1");
  if (!(length_penalty >= 0.0 && length_penalty <= 1.0)) {
    throw ValidationError("length penalty must lie in [0, 1]");
  }
}

double length_normalized_score(double log_prob, std::size_t length, double alpha) {
  if (length == 0) return log_prob;
  return log_prob / std::pow(static_cast<double>(length), alpha);
}

TokenList render(std::span<const std::size_t> ids, const ExtendedVocab& ev) {
  TokenList out;
  for (std::size_t id : ids) {
    if (id >= ev.size()) {
      throw ValidationError("render: id " + std::to_string(id) +
                            " outside extended vocabulary of size " + std::to_string(ev.size()));
    }
    if (id == Vocabulary::kPad || id == Vocabulary::kBos || id == Vocabulary::kEos) continue;
    out.push_back(ev.token(id));
  }
  return out;
}

std::vector<std::size_t> greedy_ids(const SourceEncoding& source, const ModelParams& params,
                                    std::size_t max_len, GateMode mode) {
  std::vector<std::size_t> ids;
  if (max_len == 0) return ids;
  const Encoded enc = run_encoder(source, params);
  DecoderState state = enc.start;
  std::size_t prev = Vocabulary::kBos;
  while (ids.size() < max_len) {
    auto [dist, next] =
        full_step(prev, source.ids, source.vocab.size(), enc.states, state, params, mode);
    const std::size_t w = argmax(dist.p_final);
    ids.push_back(w);
    if (w == Vocabulary::kEos) break;
    state = std::move(next);
    prev = w;
  }
  return ids;
}

TokenList greedy_decode(std::string_view source, const ModelParams& params,
                        const Vocabulary& vocab, std::size_t max_len, GateMode mode) {
  const SourceEncoding enc = encode_text(source, vocab);
  return render(greedy_ids(enc, params, max_len, mode), enc.vocab);
}

std::vector<RankedHypothesis> beam_search(const SourceEncoding& source, const ModelParams& params,
                                          const BeamConfig& cfg, GateMode mode) {
  cfg.validate();
  const std::size_t width = cfg.beam_width;
  const Encoded enc = run_encoder(source, params);

  std::vector<Hypothesis> live;
  live.push_back(Hypothesis{{}, 0.0, enc.start, false});
  std::vector<Hypothesis> pool;

  struct Candidate {
    std::size_t parent;
    std::size_t word;
    double log_prob;
  };

  for (std::size_t step = 0; step < cfg.max_length && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_states;
    next_states.reserve(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      const Hypothesis& hyp = live[h];
      const std::size_t prev = hyp.ids.empty() ? Vocabulary::kBos : hyp.ids.back();
      auto [dist, next] =
          full_step(prev, source.ids, source.vocab.size(), enc.states, hyp.state, params, mode);
      for (std::size_t w : top_k(dist.p_final, width)) {
        candidates.push_back({h, w, hyp.log_prob + ops::log_clamped(dist.p_final[w])});
      }
      next_states.push_back(std::move(next));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.log_prob > b.log_prob; });
    if (candidates.size() > width) candidates.resize(width);

    std::vector<Hypothesis> survivors;
    for (const Candidate& c : candidates) {
      Hypothesis h;
      h.ids = live[c.parent].ids;
      h.ids.push_back(c.word);
      h.log_prob = c.log_prob;
      h.state = next_states[c.parent];
      h.finished = c.word == Vocabulary::kEos;
      (h.finished ? pool : survivors).push_back(std::move(h));
    }
    live = std::move(survivors);
    if (pool.size() >= width) break;
  }
  for (auto& h : live) pool.push_back(std::move(h));

  std::vector<RankedHypothesis> ranked;
  ranked.reserve(pool.size());
  for (auto& h : pool) {
    RankedHypothesis r;
    r.tokens = render(h.ids, source.vocab);
    r.log_prob = h.log_prob;
    r.score = length_normalized_score(h.log_prob, h.ids.size(), cfg.length_penalty);
    r.finished = h.finished;
    r.ids = std::move(h.ids);
    ranked.push_back(std::move(r));
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedHypothesis& a, const RankedHypothesis& b) {
                     return a.score > b.score;
                   });
  return ranked;
}

std::vector<RankedHypothesis> beam_decode(std::string_view source, const ModelParams& params,
                                          const Vocabulary& vocab, const BeamConfig& cfg,
                                          GateMode mode) {
  return beam_search(encode_text(source, vocab), params, cfg, mode);
}

double sequence_log_prob(const SourceEncoding& source, std::span<const std::size_t> ids,
                         const ModelParams& params, GateMode mode) {
  const Encoded enc = run_encoder(source, params);
  DecoderState state = enc.start;
  std::size_t prev = Vocabulary::kBos;
  double total = 0.0;
  for (std::size_t w : ids) {
    auto [dist, next] =
        full_step(prev, source.ids, source.vocab.size(), enc.states, state, params, mode);
    if (w >= dist.p_final.size()) {
      throw ValidationError("sequence_log_prob: id " + std::to_string(w) + " out of range");
    }
    total += ops::log_clamped(dist.p_final[w]);
    state = std::move(next);
    prev = w;
  }
  return total;
}

} // namespace paragen
