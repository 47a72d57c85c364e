#pragma once

#include <cstddef>
#include <span>

#include "paragen/model.hpp"
#include "paragen/tape.hpp"
#include "paragen/tensor.hpp"

// Encoder, additive attention, decoder update and vocabulary projection.
//
// Each piece comes in two forms: a recording form on a Tape (used for
// training and gradient checks) and a plain Tensor form that runs the same
// code on a throwaway tape.
namespace paragen {

struct LstmVars {
  Var weight;
  Var bias;
  std::size_t hidden_size = 0;
};

/// Every tensor of ModelParams registered on one tape.
struct BoundParams {
  ModelDims dims;
  Var embedding;
  LstmVars encoder_fwd;
  LstmVars encoder_bwd;
  LstmVars decoder;
  Var bridge_W_hidden, bridge_b_hidden, bridge_W_cell, bridge_b_cell;
  Var attention_W, attention_b, attention_v;
  Var projection_V, projection_b;
  Var gate_W, gate_b;
};

// With `grads` set, backward accumulates each parameter's gradient into the
// matching tensor of `grads`.
BoundParams bind(Tape& tape, const ModelParams& params, ModelParams* grads = nullptr);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_cell_step(Tape& tape, const LstmVars& cell, Var input, LstmState state);
LstmState zero_state(Tape& tape, std::size_t width);

struct EncoderVars {
  Var H;             // N x 2h, row i = [forward_i, backward_i]
  Var final_hidden;  // [forward_N, backward_1]
  Var final_cell;
  std::size_t length = 0;
};

// `embeddings` is N x d_emb with N >= 1.
EncoderVars encode(Tape& tape, Var embeddings, const LstmVars& fwd, const LstmVars& bwd);

// Decoder start state from the encoder's final states.
LstmState bridge(Tape& tape, const BoundParams& p, const EncoderVars& enc);

/// Step-independent pieces of the attention scores: the encoder half of
/// W [h_i, s] for every i, the decoder half of W, and H transposed.
struct AttentionCache {
  Var keys;         // N x attention
  Var query_W;      // attention x state
  Var H_transposed; // 2h x N
};

AttentionCache prepare_attention(Tape& tape, const BoundParams& p, const EncoderVars& enc);

struct AttentionVars {
  Var scores;   // e, N
  Var weights;  // a = softmax(e)
  Var context;  // sum_i a_i h_i
};

// `query` is the decoder hidden state the scores are computed against.
AttentionVars attend(Tape& tape, const BoundParams& p, const AttentionCache& cache, Var query);

// One LSTM step on [prev_embedding, context].
LstmState decoder_step(Tape& tape, const LstmVars& dec, Var prev_embedding, Var context,
                       LstmState state);

Var project_vocab(Tape& tape, const BoundParams& p, Var state_hidden, Var context);

// ---------------------------------------------------------------------------
// Tensor forms.

struct DecoderState {
  Tensor hidden;
  Tensor cell;
};

struct EncoderStates {
  Tensor H;
  Tensor final_hidden;
  Tensor final_cell;
  std::size_t length() const { return H.rows(); }
};

struct Attention {
  Tensor scores;
  Tensor weights;
  Tensor context;
};

DecoderState lstm_cell_step(const LSTMCellParams& cell, const Tensor& input,
                            const DecoderState& state);
EncoderStates encode(const Tensor& embeddings, const LSTMCellParams& fwd,
                     const LSTMCellParams& bwd);
Attention attend(const EncoderStates& enc, const DecoderState& state,
                 const AttentionParams& params);
DecoderState decoder_step(const Tensor& prev_embedding, const Tensor& context,
                          const DecoderState& state, const LSTMCellParams& dec);
Tensor project_vocab(const DecoderState& state, const Tensor& context,
                     const ProjectionParams& params);

// Embeds source ids (extended ids use the UNK row) and runs the encoder.
EncoderStates encode_ids(std::span<const std::size_t> ids, const ModelParams& params);
DecoderState initial_state(const EncoderStates& enc, const ModelParams& params);

} // namespace paragen
