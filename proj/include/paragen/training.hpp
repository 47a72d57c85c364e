#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "paragen/dataset.hpp"
#include "paragen/model.hpp"
#include "paragen/pointer_generator.hpp"
#include "paragen/vocab.hpp"

namespace paragen {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  double clip_norm = 2.0;
  std::uint64_t seed = 1;
  std::size_t max_source_len = 50;
  std::size_t max_target_len = 50;
  std::size_t vocab_size = 10000;
  std::size_t min_count = 1;
  std::size_t embedding = 64;
  std::size_t hidden = 64;
  std::size_t state = 64;
  std::size_t attention = 64;
  // Epochs between intermediate checkpoints; 0 disables them.
  std::size_t checkpoint_every = 0;
  GateMode gate = GateMode::learned;

  // Throws ValidationError naming the first bad field.
  void validate() const;
  ModelDims dims(std::size_t vocab_size) const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_nll = 0.0;
  double token_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t truncated_examples = 0;
};

/// A pair mapped into id space: source ids under its extended vocabulary and
/// gold target ids (EOS appended).
struct TrainingExample {
  std::vector<std::size_t> source_ids;
  std::vector<std::size_t> target_ids;
  std::size_t extended_size = 0;
};

// Tokenizes and encodes a pair, truncating to the given lengths (the EOS is
// added after truncation). Sets *truncated when either side was cut.
TrainingExample prepare_example(const SentencePair& pair, const Vocabulary& vocab,
                                std::size_t max_source_len, std::size_t max_target_len,
                                bool* truncated = nullptr);

struct LossStats {
  double loss = 0.0;
  std::size_t steps = 0;
  std::size_t correct = 0;  // argmax == gold under teacher forcing
};

/// Mean over target steps of -log P_t(gold_t) with teacher forcing (BOS
/// first). With `grads` set, the gradient is accumulated into it.
LossStats sequence_loss(const TrainingExample& example, const ModelParams& params,
                        ModelParams* grads = nullptr, GateMode mode = GateMode::learned);
double sequence_loss(const SentencePair& pair, const Vocabulary& vocab, const ModelParams& params);

// Rescales grads in place to global L2 norm <= max_norm. Returns the norm
// before clipping.
double clip_global_norm(ModelParams& grads, double max_norm);

class Adam {
 public:
  Adam(const ModelParams& like, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);
  void step(ModelParams& params, const ModelParams& grads);
  std::size_t steps() const { return steps_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
  ModelParams m_;
  ModelParams v_;
};

struct TrainHooks {
  std::function<void(const EpochStats&)> on_epoch;
  std::function<void(std::size_t epoch, const ModelParams&)> on_checkpoint;
  std::function<void(const std::string&)> warn;
};

struct TrainResult {
  ModelParams params;
  Vocabulary vocab;
  TrainReport report;
};

/// Builds the vocabulary from both sides of the data, then runs per-example
/// Adam updates with global-norm clipping. Throws NumericalError identifying
/// the epoch and example on a non-finite loss.
TrainResult train(std::span<const SentencePair> dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});
TrainResult train(std::span<const SentencePair> dataset, Vocabulary vocab,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

} // namespace paragen
