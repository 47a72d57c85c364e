#include "paragen/model.hpp"

#include <sstream>

#include "paragen/errors.hpp"
#include "paragen/random.hpp"

namespace paragen {

std::string ModelDims::describe() const {
  std::ostringstream out;
  out << "vocab=" << vocab_size << " emb=" << embedding << " hidden=" << hidden
      << " state=" << state << " attention=" << attention;
  return out.str();
}

LSTMCellParams LSTMCellParams::zeros(std::size_t input_size, std::size_t hidden_size) {
  return LSTMCellParams{Tensor({4 * hidden_size, input_size + hidden_size}),
                        Tensor({4 * hidden_size})};
}

ModelParams ModelParams::zeros(const ModelDims& d) {
  if (d.vocab_size <= 4 || d.embedding == 0 || d.hidden == 0 || d.state == 0 ||
      d.attention == 0) {
    throw ValidationError("invalid model widths: " + d.describe());
  }
  const std::size_t ctx = d.context();
  ModelParams p;
  p.dims = d;
  p.embedding = Tensor({d.vocab_size, d.embedding});
  p.encoder_fwd = LSTMCellParams::zeros(d.embedding, d.hidden);
  p.encoder_bwd = LSTMCellParams::zeros(d.embedding, d.hidden);
  p.bridge = BridgeParams{Tensor({d.state, ctx}), Tensor({d.state}), Tensor({d.state, ctx}),
                          Tensor({d.state})};
  p.decoder = LSTMCellParams::zeros(d.embedding + ctx, d.state);
  p.attention = AttentionParams{Tensor({d.attention, ctx + d.state}), Tensor({d.attention}),
                                Tensor({d.attention})};
  p.projection = ProjectionParams{Tensor({d.vocab_size, d.state + ctx}), Tensor({d.vocab_size})};
  p.gate = GateParams{Tensor({1, d.embedding + d.state + ctx}), Tensor({1})};
  return p;
}

ModelParams ModelParams::initialize(const ModelDims& dims, std::uint64_t seed) {
  ModelParams p = zeros(dims);
  Rng rng(seed);
  p.for_each([&](std::string_view, Tensor& t) {
    for (double& x : t.data()) x = rng.uniform(-0.1, 0.1);
  });
  for (LSTMCellParams* cell : {&p.encoder_fwd, &p.encoder_bwd, &p.decoder}) {
    const std::size_t h = cell->hidden_size();
    for (std::size_t i = h; i < 2 * h; ++i) cell->bias[i] = 1.0;
  }
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Tensor& t) { n += t.size(); });
  return n;
}

std::vector<NamedTensor> ModelParams::to_named() const {
  std::vector<NamedTensor> out;
  for_each([&](std::string_view name, const Tensor& t) { out.push_back({std::string(name), t}); });
  return out;
}

ModelParams ModelParams::from_named(const ModelDims& dims, std::span<const NamedTensor> named) {
  ModelParams p = zeros(dims);
  std::size_t k = 0;
  p.for_each([&](std::string_view name, Tensor& t) {
    if (k >= named.size() || named[k].name != name || !named[k].value.same_shape(t)) {
      throw DimensionError("from_named: entry " + std::to_string(k) + " does not match " +
                           std::string(name) + " " + shape_string(t.shape()));
    }
    t = named[k++].value;
  });
  if (k != named.size()) {
    throw DimensionError("from_named: " + std::to_string(named.size() - k) + " extra tensors");
  }
  return p;
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (!(dims == other.dims)) return false;
  std::vector<const Tensor*> mine;
  for_each([&](std::string_view, const Tensor& t) { mine.push_back(&t); });
  std::size_t k = 0;
  bool equal = true;
  other.for_each([&](std::string_view, const Tensor& t) { equal = equal && *mine[k++] == t; });
  return equal;
}

} // namespace paragen
