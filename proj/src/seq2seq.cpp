#include "paragen/seq2seq.hpp"

#include <vector>

#include "paragen/errors.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

namespace {

LstmVars bind_cell(Tape& tape, const LSTMCellParams& cell, LSTMCellParams* grads) {
  return LstmVars{tape.parameter(cell.weight, grads ? &grads->weight : nullptr),
                  tape.parameter(cell.bias, grads ? &grads->bias : nullptr), cell.hidden_size()};
}

Var param(Tape& tape, const Tensor& value, Tensor* grad) { return tape.parameter(value, grad); }

} // namespace

BoundParams bind(Tape& tape, const ModelParams& p, ModelParams* g) {
  if (g && !(g->dims == p.dims)) {
    throw DimensionError("bind: gradient widths " + g->dims.describe() + " vs parameters " +
                         p.dims.describe());
  }
  BoundParams b;
  b.dims = p.dims;
  b.embedding = param(tape, p.embedding, g ? &g->embedding : nullptr);
  b.encoder_fwd = bind_cell(tape, p.encoder_fwd, g ? &g->encoder_fwd : nullptr);
  b.encoder_bwd = bind_cell(tape, p.encoder_bwd, g ? &g->encoder_bwd : nullptr);
  b.decoder = bind_cell(tape, p.decoder, g ? &g->decoder : nullptr);
  b.bridge_W_hidden = param(tape, p.bridge.W_hidden, g ? &g->bridge.W_hidden : nullptr);
  b.bridge_b_hidden = param(tape, p.bridge.b_hidden, g ? &g->bridge.b_hidden : nullptr);
  b.bridge_W_cell = param(tape, p.bridge.W_cell, g ? &g->bridge.W_cell : nullptr);
  b.bridge_b_cell = param(tape, p.bridge.b_cell, g ? &g->bridge.b_cell : nullptr);
  b.attention_W = param(tape, p.attention.W, g ? &g->attention.W : nullptr);
  b.attention_b = param(tape, p.attention.b, g ? &g->attention.b : nullptr);
  b.attention_v = param(tape, p.attention.v, g ? &g->attention.v : nullptr);
  b.projection_V = param(tape, p.projection.V, g ? &g->projection.V : nullptr);
  b.projection_b = param(tape, p.projection.b, g ? &g->projection.b : nullptr);
  b.gate_W = param(tape, p.gate.W, g ? &g->gate.W : nullptr);
  b.gate_b = param(tape, p.gate.b, g ? &g->gate.b : nullptr);
  return b;
}

LstmState lstm_cell_step(Tape& tape, const LstmVars& cell, Var input, LstmState state) {
  const std::size_t h = cell.hidden_size;
  const Tensor& w = tape.value(cell.weight);
  const std::size_t in = tape.value(input).size();
  if (tape.value(state.h).size() != h || tape.value(state.c).size() != h ||
      w.cols() != in + h) {
    throw DimensionError("lstm_cell_step: weight " + shape_string(w.shape()) + " with input " +
                         shape_string(tape.value(input).shape()) + " and state width " +
                         std::to_string(tape.value(state.h).size()));
  }
  const Var z = tape.add(tape.matvec(cell.weight, tape.concat({input, state.h})), cell.bias);
  const Var i = tape.sigmoid(tape.slice(z, 0, h));
  const Var f = tape.sigmoid(tape.slice(z, h, h));
  const Var g = tape.tanh(tape.slice(z, 2 * h, h));
  const Var o = tape.sigmoid(tape.slice(z, 3 * h, h));
  const Var c = tape.add(tape.mul(f, state.c), tape.mul(i, g));
  const Var out = tape.mul(o, tape.tanh(c));
  return LstmState{out, c};
}

LstmState zero_state(Tape& tape, std::size_t width) {
  return LstmState{tape.constant(Tensor({width})), tape.constant(Tensor({width}))};
}

EncoderVars encode(Tape& tape, Var embeddings, const LstmVars& fwd, const LstmVars& bwd) {
  const Tensor& e = tape.value(embeddings);
  if (e.rank() != 2) {
    throw ValidationError("encode: expected N x d embeddings, got " + shape_string(e.shape()));
  }
  const std::size_t n = e.rows();
  std::vector<Var> inputs;
  inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) inputs.push_back(tape.row(embeddings, i));

  std::vector<LstmState> forward(n), backward(n);
  LstmState s = zero_state(tape, fwd.hidden_size);
  for (std::size_t i = 0; i < n; ++i) {
    s = lstm_cell_step(tape, fwd, inputs[i], s);
    forward[i] = s;
  }
  s = zero_state(tape, bwd.hidden_size);
  for (std::size_t i = n; i-- > 0;) {
    s = lstm_cell_step(tape, bwd, inputs[i], s);
    backward[i] = s;
  }

  std::vector<Var> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(tape.concat({forward[i].h, backward[i].h}));
  EncoderVars enc;
  enc.H = tape.stack(rows);
  enc.final_hidden = tape.concat({forward[n - 1].h, backward[0].h});
  enc.final_cell = tape.concat({forward[n - 1].c, backward[0].c});
  enc.length = n;
  return enc;
}

LstmState bridge(Tape& tape, const BoundParams& p, const EncoderVars& enc) {
  const Var h = tape.tanh(
      tape.add(tape.matvec(p.bridge_W_hidden, enc.final_hidden), p.bridge_b_hidden));
  const Var c =
      tape.tanh(tape.add(tape.matvec(p.bridge_W_cell, enc.final_cell), p.bridge_b_cell));
  return LstmState{h, c};
}

AttentionCache prepare_attention(Tape& tape, const BoundParams& p, const EncoderVars& enc) {
  const std::size_t ctx = p.dims.context();
  AttentionCache cache;
  const Var key_W = tape.columns(p.attention_W, 0, ctx);
  cache.keys = tape.matmul(enc.H, tape.transpose(key_W));
  cache.query_W = tape.columns(p.attention_W, ctx, p.dims.state);
  cache.H_transposed = tape.transpose(enc.H);
  return cache;
}

AttentionVars attend(Tape& tape, const BoundParams& p, const AttentionCache& cache, Var query) {
  const Var q = tape.add(tape.matvec(cache.query_W, query), p.attention_b);
  const Var hidden = tape.tanh(tape.add_rows(cache.keys, q));
  AttentionVars out;
  out.scores = tape.matvec(hidden, p.attention_v);
  out.weights = tape.softmax(out.scores);
  out.context = tape.matvec(cache.H_transposed, out.weights);
  return out;
}

LstmState decoder_step(Tape& tape, const LstmVars& dec, Var prev_embedding, Var context,
                       LstmState state) {
  return lstm_cell_step(tape, dec, tape.concat({prev_embedding, context}), state);
}

Var project_vocab(Tape& tape, const BoundParams& p, Var state_hidden, Var context) {
  const Var logits = tape.add(tape.matvec(p.projection_V, tape.concat({state_hidden, context})),
                              p.projection_b);
  return tape.softmax(logits);
}

// ---------------------------------------------------------------------------

namespace {

LstmVars bind_cell_const(Tape& tape, const LSTMCellParams& cell) {
  return bind_cell(tape, cell, nullptr);
}

// A throwaway BoundParams carrying only what the attention functions read.
BoundParams attention_only(Tape& tape, const AttentionParams& a, std::size_t hidden,
                           std::size_t state) {
  BoundParams b;
  b.dims.hidden = hidden;
  b.dims.state = state;
  b.dims.attention = a.v.size();
  b.attention_W = tape.parameter(a.W, nullptr);
  b.attention_b = tape.parameter(a.b, nullptr);
  b.attention_v = tape.parameter(a.v, nullptr);
  return b;
}

} // namespace

DecoderState lstm_cell_step(const LSTMCellParams& cell, const Tensor& input,
                            const DecoderState& state) {
  Tape tape;
  const LstmVars vars = bind_cell_const(tape, cell);
  const LstmState out = lstm_cell_step(
      tape, vars, tape.constant(input),
      LstmState{tape.constant(state.hidden), tape.constant(state.cell)});
  return DecoderState{tape.value(out.h), tape.value(out.c)};
}

EncoderStates encode(const Tensor& embeddings, const LSTMCellParams& fwd,
                     const LSTMCellParams& bwd) {
  Tape tape;
  const EncoderVars enc = encode(tape, tape.constant(embeddings), bind_cell_const(tape, fwd),
                                 bind_cell_const(tape, bwd));
  return EncoderStates{tape.value(enc.H), tape.value(enc.final_hidden),
                       tape.value(enc.final_cell)};
}

Attention attend(const EncoderStates& enc, const DecoderState& state,
                 const AttentionParams& params) {
  const std::size_t ctx = enc.H.cols();
  if (ctx % 2 != 0 || params.W.cols() != ctx + state.hidden.size()) {
    throw DimensionError("attend: attention weight " + shape_string(params.W.shape()) +
                         " vs encoder width " + std::to_string(ctx) + " and state width " +
                         std::to_string(state.hidden.size()));
  }
  Tape tape;
  const BoundParams b = attention_only(tape, params, ctx / 2, state.hidden.size());
  EncoderVars vars;
  vars.H = tape.constant(enc.H);
  vars.length = enc.length();
  const AttentionCache cache = prepare_attention(tape, b, vars);
  const AttentionVars out = attend(tape, b, cache, tape.constant(state.hidden));
  return Attention{tape.value(out.scores), tape.value(out.weights), tape.value(out.context)};
}

DecoderState decoder_step(const Tensor& prev_embedding, const Tensor& context,
                          const DecoderState& state, const LSTMCellParams& dec) {
  return lstm_cell_step(dec, ops::concat(prev_embedding, context), state);
}

Tensor project_vocab(const DecoderState& state, const Tensor& context,
                     const ProjectionParams& params) {
  const Tensor logits = ops::add(ops::matvec(params.V, ops::concat(state.hidden, context)),
                                 params.b);
  return ops::softmax(logits);
}

EncoderStates encode_ids(std::span<const std::size_t> ids, const ModelParams& params) {
  if (ids.empty()) throw ValidationError("encode: empty source");
  Tape tape;
  const BoundParams b = bind(tape, params);
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (std::size_t id : ids) rows.push_back(embedding_row(id, params.dims.vocab_size));
  const EncoderVars enc =
      encode(tape, tape.gather_rows(b.embedding, rows), b.encoder_fwd, b.encoder_bwd);
  return EncoderStates{tape.value(enc.H), tape.value(enc.final_hidden),
                       tape.value(enc.final_cell)};
}

DecoderState initial_state(const EncoderStates& enc, const ModelParams& params) {
  Tape tape;
  const BoundParams b = bind(tape, params);
  EncoderVars vars;
  vars.H = tape.constant(enc.H);
  vars.final_hidden = tape.constant(enc.final_hidden);
  vars.final_cell = tape.constant(enc.final_cell);
  vars.length = enc.length();
  const LstmState s = bridge(tape, b, vars);
  return DecoderState{tape.value(s.h), tape.value(s.c)};
}

} // namespace paragen
