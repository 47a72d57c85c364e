#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "paragen/model.hpp"
#include "paragen/pointer_generator.hpp"
#include "paragen/seq2seq.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

struct BeamConfig {
  std::size_t beam_width = 4;
  std::size_t max_length = 50;
  // Final ranking uses log_prob / length^length_penalty.
  double length_penalty = 0.7;

  void validate() const;
};

struct Hypothesis {
  std::vector<std::size_t> ids;  // extended id space, EOS included when finished
  double log_prob = 0.0;
  DecoderState state;
  bool finished = false;
};

struct RankedHypothesis {
  std::vector<std::size_t> ids;
  TokenList tokens;
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;
};

double length_normalized_score(double log_prob, std::size_t length, double alpha);

// Fixed ids via the vocabulary, extended ids as their source surface form,
// PAD/BOS/EOS dropped, UNK written as "<unk>". ValidationError on ids
// outside the extended vocabulary.
TokenList render(std::span<const std::size_t> ids, const ExtendedVocab& ev);

// Argmax decoding (ties to the lowest id) until EOS or max_len tokens.
std::vector<std::size_t> greedy_ids(const SourceEncoding& source, const ModelParams& params,
                                    std::size_t max_len, GateMode mode = GateMode::learned);
TokenList greedy_decode(std::string_view source, const ModelParams& params,
                        const Vocabulary& vocab, std::size_t max_len,
                        GateMode mode = GateMode::learned);

/// Beam search over the extended vocabulary. Each live hypothesis proposes its
/// top-B extensions; the best B overall by cumulative log-probability survive.
/// Hypotheses ending in EOS retire to the result pool, and the search stops
/// once B have retired or max_length is reached. Results are ranked by
/// length-normalized score.
std::vector<RankedHypothesis> beam_search(const SourceEncoding& source, const ModelParams& params,
                                          const BeamConfig& cfg,
                                          GateMode mode = GateMode::learned);
std::vector<RankedHypothesis> beam_decode(std::string_view source, const ModelParams& params,
                                          const Vocabulary& vocab, const BeamConfig& cfg,
                                          GateMode mode = GateMode::learned);

// Sum of clamped log P_t(ids[t]) obtained by feeding `ids` back through the
// model.
double sequence_log_prob(const SourceEncoding& source, std::span<const std::size_t> ids,
                         const ModelParams& params, GateMode mode = GateMode::learned);

} // namespace paragen
