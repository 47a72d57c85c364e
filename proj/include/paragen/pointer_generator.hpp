#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "paragen/model.hpp"
#include "paragen/seq2seq.hpp"
#include "paragen/tape.hpp"
#include "paragen/vocab.hpp"

// Copy distribution, generation gate and the final mixture over the
// extended vocabulary.
namespace paragen {

enum class GateMode {
  learned,
  // Ablation: p_gen pinned to 1, so extended ids are unreachable.
  generate_only,
};

// P_copy(w) = sum of a_i over source positions i holding w. Throws
// ValidationError when a source id is >= extended_size.
Var copy_distribution(Tape& tape, Var attention, std::span<const std::size_t> source_ids,
                      std::size_t extended_size);
Tensor copy_distribution(const Tensor& attention, std::span<const std::size_t> source_ids,
                         std::size_t extended_size);

// sigmoid(W [w_prev, s, context] + b), shape [1].
Var generation_gate(Tape& tape, const BoundParams& p, Var prev_embedding, Var state_hidden,
                    Var context);
double generation_gate(const Tensor& prev_embedding, const Tensor& state_hidden,
                       const Tensor& context, const GateParams& params);

// p_gen * pad(P_vocab) + (1 - p_gen) * P_copy.
Var mix(Tape& tape, Var p_vocab, Var p_copy, Var p_gen);
// Throws ValidationError for p_gen outside [0, 1] or P_vocab wider than P_copy.
Tensor mix(const Tensor& p_vocab, const Tensor& p_copy, double p_gen);

/// Per-example encoder output plus the bookkeeping every decoder step needs.
struct EncodedSource {
  EncoderVars encoder;
  AttentionCache cache;
  std::vector<std::size_t> source_ids;
  std::size_t extended_size = 0;
};

EncodedSource encode_source_vars(Tape& tape, const BoundParams& p,
                                 std::span<const std::size_t> source_ids,
                                 std::size_t extended_size);

struct StepVars {
  AttentionVars attention;
  LstmState state;
  Var p_vocab;
  Var p_copy;
  Var p_gen;
  Var p_final;
};

/// One decoder time step: attend with the incoming state, advance the
/// decoder LSTM on [w_prev, context], project, gate, mix.
StepVars full_step(Tape& tape, const BoundParams& p, const EncodedSource& src,
                   std::size_t prev_id, LstmState state, GateMode mode = GateMode::learned);

struct StepDistribution {
  Tensor attention;
  Tensor p_vocab;
  Tensor p_copy;
  double p_gen = 0.0;
  Tensor p_final;
};

std::pair<StepDistribution, DecoderState> full_step(std::size_t prev_id,
                                                    std::span<const std::size_t> source_ids,
                                                    std::size_t extended_size,
                                                    const EncoderStates& enc,
                                                    const DecoderState& state,
                                                    const ModelParams& params,
                                                    GateMode mode = GateMode::learned);

} // namespace paragen
