#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paragen/grad_check.hpp"
#include "paragen/tensor.hpp"

namespace paragen {

/// Widths of every learned block.
struct ModelDims {
  std::size_t vocab_size = 0;  // fixed vocabulary, reserved ids included
  std::size_t embedding = 64;
  std::size_t hidden = 64;     // per encoder direction
  std::size_t state = 64;      // decoder
  std::size_t attention = 64;

  std::size_t context() const { return 2 * hidden; }
  bool operator==(const ModelDims&) const = default;
  std::string describe() const;
};

/// Stacked LSTM gates. Rows of `weight`/`bias` are the input, forget, cell
/// candidate and output blocks, each `hidden_size` tall; columns of `weight`
/// are [input, previous hidden].
struct LSTMCellParams {
  Tensor weight;
  Tensor bias;

  static LSTMCellParams zeros(std::size_t input_size, std::size_t hidden_size);
  std::size_t hidden_size() const { return bias.size() / 4; }
  std::size_t input_size() const { return weight.cols() - hidden_size(); }
};

// Scores v' tanh(W [h_i, s] + b).
struct AttentionParams {
  Tensor W;  // attention x (context + state)
  Tensor b;  // attention
  Tensor v;  // attention
};

// softmax(V [s, context] + b) over the fixed vocabulary.
struct ProjectionParams {
  Tensor V;  // vocab x (state + context)
  Tensor b;  // vocab
};

// sigmoid(W [w_prev, s, context] + b).
struct GateParams {
  Tensor W;  // 1 x (embedding + state + context)
  Tensor b;  // 1
};

// Maps the concatenated final encoder states to the decoder's initial
// (hidden, cell) through tanh(W x + b).
struct BridgeParams {
  Tensor W_hidden;
  Tensor b_hidden;
  Tensor W_cell;
  Tensor b_cell;
};

struct ModelParams {
  ModelDims dims;
  Tensor embedding;  // vocab x embedding
  LSTMCellParams encoder_fwd;
  LSTMCellParams encoder_bwd;
  LSTMCellParams decoder;
  BridgeParams bridge;
  AttentionParams attention;
  ProjectionParams projection;
  GateParams gate;

  static ModelParams zeros(const ModelDims& dims);
  // Uniform in [-0.1, 0.1] in declared tensor order, then forget-gate biases
  // set to 1.
  static ModelParams initialize(const ModelDims& dims, std::uint64_t seed);

  // Visits every trainable tensor in the fixed declared order used by
  // checkpoints, optimizers and gradient checks.
  template <typename F>
  void for_each(F&& f) {
    for_each_impl(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    for_each_impl(*this, f);
  }

  std::size_t parameter_count() const;
  std::vector<NamedTensor> to_named() const;
  static ModelParams from_named(const ModelDims& dims, std::span<const NamedTensor> named);

  // Bitwise equality of every tensor.
  bool operator==(const ModelParams& other) const;

 private:
  template <typename Self, typename F>
  static void for_each_impl(Self& p, F& f) {
    f(std::string_view("embedding"), p.embedding);
    f(std::string_view("encoder_fwd.weight"), p.encoder_fwd.weight);
    f(std::string_view("encoder_fwd.bias"), p.encoder_fwd.bias);
    f(std::string_view("encoder_bwd.weight"), p.encoder_bwd.weight);
    f(std::string_view("encoder_bwd.bias"), p.encoder_bwd.bias);
    f(std::string_view("bridge.W_hidden"), p.bridge.W_hidden);
    f(std::string_view("bridge.b_hidden"), p.bridge.b_hidden);
    f(std::string_view("bridge.W_cell"), p.bridge.W_cell);
    f(std::string_view("bridge.b_cell"), p.bridge.b_cell);
    f(std::string_view("decoder.weight"), p.decoder.weight);
    f(std::string_view("decoder.bias"), p.decoder.bias);
    f(std::string_view("attention.W"), p.attention.W);
    f(std::string_view("attention.b"), p.attention.b);
    f(std::string_view("attention.v"), p.attention.v);
    f(std::string_view("projection.V"), p.projection.V);
    f(std::string_view("projection.b"), p.projection.b);
    f(std::string_view("gate.W"), p.gate.W);
    f(std::string_view("gate.b"), p.gate.b);
  }
};

} // namespace paragen
