#include "paragen/pointer_generator.hpp"

#include <cmath>
#include <string>

#include "paragen/errors.hpp"

namespace paragen {

namespace {

void check_source_ids(std::span<const std::size_t> ids, std::size_t extended_size) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= extended_size) {
      throw ValidationError("copy_distribution: source id " + std::to_string(ids[i]) +
                            " at position " + std::to_string(i) +
                            " outside extended vocabulary of size " +
                            std::to_string(extended_size));
    }
  }
}

} // namespace

Var copy_distribution(Tape& tape, Var attention, std::span<const std::size_t> source_ids,
                      std::size_t extended_size) {
  check_source_ids(source_ids, extended_size);
  return tape.scatter_add(attention, source_ids, extended_size);
}

Tensor copy_distribution(const Tensor& attention, std::span<const std::size_t> source_ids,
                         std::size_t extended_size) {
  check_source_ids(source_ids, extended_size);
  if (attention.rank() != 1 || attention.size() != source_ids.size()) {
    throw DimensionError("copy_distribution: attention " + shape_string(attention.shape()) +
                         " for " + std::to_string(source_ids.size()) + " source positions");
  }
  Tensor out({extended_size});
  for (std::size_t i = 0; i < source_ids.size(); ++i) out[source_ids[i]] += attention[i];
  return out;
}

Var generation_gate(Tape& tape, const BoundParams& p, Var prev_embedding, Var state_hidden,
                    Var context) {
  const Var features = tape.concat({prev_embedding, state_hidden, context});
  return tape.sigmoid(tape.add(tape.matvec(p.gate_W, features), p.gate_b));
}

double generation_gate(const Tensor& prev_embedding, const Tensor& state_hidden,
                       const Tensor& context, const GateParams& params) {
  const Tensor features = ops::concat(ops::concat(prev_embedding, state_hidden), context);
  return ops::sigmoid(ops::matvec(params.W, features)[0] + params.b[0]);
}

Var mix(Tape& tape, Var p_vocab, Var p_copy, Var p_gen) {
  const std::size_t extended = tape.value(p_copy).size();
  const Var generated = tape.scale(tape.pad(p_vocab, extended), p_gen);
  const Var copied = tape.scale(p_copy, tape.one_minus(p_gen));
  return tape.add(generated, copied);
}

Tensor mix(const Tensor& p_vocab, const Tensor& p_copy, double p_gen) {
  if (!(p_gen >= 0.0 && p_gen <= 1.0)) {
    throw ValidationError("mix: p_gen " + std::to_string(p_gen) + " outside [0, 1]");
  }
  if (p_vocab.rank() != 1 || p_copy.rank() != 1 || p_vocab.size() > p_copy.size()) {
    throw ValidationError("mix: vocabulary distribution " + shape_string(p_vocab.shape()) +
                          " wider than copy distribution " + shape_string(p_copy.shape()));
  }
  Tensor out({p_copy.size()});
  for (std::size_t w = 0; w < out.size(); ++w) {
    const double generated = w < p_vocab.size() ? p_vocab[w] : 0.0;
    out[w] = p_gen * generated + (1.0 - p_gen) * p_copy[w];
  }
  return out;
}

EncodedSource encode_source_vars(Tape& tape, const BoundParams& p,
                                 std::span<const std::size_t> source_ids,
                                 std::size_t extended_size) {
  if (source_ids.empty()) throw ValidationError("encode: empty source");
  std::vector<std::size_t> rows;
  rows.reserve(source_ids.size());
  for (std::size_t id : source_ids) rows.push_back(embedding_row(id, p.dims.vocab_size));
  EncodedSource src;
  src.encoder =
      encode(tape, tape.gather_rows(p.embedding, rows), p.encoder_fwd, p.encoder_bwd);
  src.cache = prepare_attention(tape, p, src.encoder);
  src.source_ids.assign(source_ids.begin(), source_ids.end());
  src.extended_size = extended_size;
  return src;
}

StepVars full_step(Tape& tape, const BoundParams& p, const EncodedSource& src,
                   std::size_t prev_id, LstmState state, GateMode mode) {
  if (prev_id >= src.extended_size) {
    throw ValidationError("full_step: previous id " + std::to_string(prev_id) +
                          " outside extended vocabulary of size " +
                          std::to_string(src.extended_size));
  }
  StepVars out;
  const Var prev = tape.row(p.embedding, embedding_row(prev_id, p.dims.vocab_size));
  out.attention = attend(tape, p, src.cache, state.h);
  out.state = decoder_step(tape, p.decoder, prev, out.attention.context, state);
  out.p_vocab = project_vocab(tape, p, out.state.h, out.attention.context);
  out.p_copy = copy_distribution(tape, out.attention.weights, src.source_ids, src.extended_size);
  out.p_gen = mode == GateMode::generate_only
                  ? tape.constant(Tensor::scalar(1.0))
                  : generation_gate(tape, p, prev, out.state.h, out.attention.context);
  out.p_final = mix(tape, out.p_vocab, out.p_copy, out.p_gen);
  return out;
}

std::pair<StepDistribution, DecoderState> full_step(std::size_t prev_id,
                                                    std::span<const std::size_t> source_ids,
                                                    std::size_t extended_size,
                                                    const EncoderStates& enc,
                                                    const DecoderState& state,
                                                    const ModelParams& params, GateMode mode) {
  Tape tape;
  const BoundParams b = bind(tape, params);
  check_source_ids(source_ids, extended_size);
  EncodedSource src;
  src.encoder.H = tape.constant(enc.H);
  src.encoder.length = enc.length();
  src.cache = prepare_attention(tape, b, src.encoder);
  src.source_ids.assign(source_ids.begin(), source_ids.end());
  src.extended_size = extended_size;
  const StepVars step = full_step(tape, b, src, prev_id,
                                  LstmState{tape.constant(state.hidden), tape.constant(state.cell)},
                                  mode);
  StepDistribution dist{tape.value(step.attention.weights), tape.value(step.p_vocab),
                        tape.value(step.p_copy), tape.scalar(step.p_gen),
                        tape.value(step.p_final)};
  return {std::move(dist), DecoderState{tape.value(step.state.h), tape.value(step.state.c)}};
}

} // namespace paragen
