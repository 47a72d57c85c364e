#include "paragen/training.hpp"

#include <chrono>
#include <cmath>

#include "paragen/errors.hpp"
#include "paragen/random.hpp"
#include "paragen/seq2seq.hpp"

namespace paragen {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw ValidationError(std::string("train config: ") + name + " must be positive");
    }
  };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train config: learning_rate must be finite and non-negative");
  }
  positive(static_cast<double>(epochs), "epochs");
  positive(clip_norm, "clip_norm");
  positive(static_cast<double>(max_source_len), "max_source_len");
  positive(static_cast<double>(max_target_len), "max_target_len");
  positive(static_cast<double>(min_count), "min_count");
  positive(static_cast<double>(embedding), "embedding");
  positive(static_cast<double>(hidden), "hidden");
  positive(static_cast<double>(state), "state");
  positive(static_cast<double>(attention), "attention");
  if (vocab_size <= Vocabulary::kReserved) {
    throw ValidationError("train config: vocab_size must exceed 4");
  }
}

ModelDims TrainConfig::dims(std::size_t vocab) const {
  return ModelDims{vocab, embedding, hidden, state, attention};
}

TrainingExample prepare_example(const SentencePair& pair, const Vocabulary& vocab,
                                std::size_t max_source_len, std::size_t max_target_len,
                                bool* truncated) {
  TokenList source = tokenize(pair.x);
  TokenList target = tokenize(pair.y);
  if (source.empty()) throw ValidationError("training pair has an empty source");
  if (target.empty()) throw ValidationError("training pair has an empty target");
  bool cut = false;
  if (source.size() > max_source_len) {
    source.resize(max_source_len);
    cut = true;
  }
  if (target.size() > max_target_len) {
    target.resize(max_target_len);
    cut = true;
  }
  if (truncated) *truncated = cut;
  SourceEncoding enc = encode_source(source, vocab);
  TrainingExample ex;
  ex.target_ids = encode_target(target, enc.vocab);
  ex.target_ids.push_back(Vocabulary::kEos);
  ex.extended_size = enc.vocab.size();
  ex.source_ids = std::move(enc.ids);
  return ex;
}

LossStats sequence_loss(const TrainingExample& example, const ModelParams& params,
                        ModelParams* grads, GateMode mode) {
  if (example.target_ids.empty()) {
    throw ValidationError("sequence_loss: empty target");
  }
  Tape tape;
  const BoundParams b = bind(tape, params, grads);
  const EncodedSource src =
      encode_source_vars(tape, b, example.source_ids, example.extended_size);
  LstmState state = bridge(tape, b, src.encoder);

  LossStats stats;
  std::vector<Var> step_losses;
  step_losses.reserve(example.target_ids.size());
  std::size_t prev = Vocabulary::kBos;
  for (std::size_t gold : example.target_ids) {
    const StepVars step = full_step(tape, b, src, prev, state, mode);
    const Tensor& dist = tape.value(step.p_final);
    std::size_t best = 0;
    for (std::size_t w = 1; w < dist.size(); ++w) {
      if (dist[w] > dist[best]) best = w;
    }
    if (best == gold) ++stats.correct;
    step_losses.push_back(tape.neg(tape.log_clamped(tape.pick(step.p_final, gold))));
    state = step.state;
    prev = gold;
  }
  const Var loss = tape.mean(step_losses);
  stats.loss = tape.scalar(loss);
  stats.steps = example.target_ids.size();
  if (grads) tape.backward(loss);
  return stats;
}

double sequence_loss(const SentencePair& pair, const Vocabulary& vocab, const ModelParams& params) {
  const TrainingExample ex = prepare_example(pair, vocab, SIZE_MAX, SIZE_MAX);
  return sequence_loss(ex, params).loss;
}

double clip_global_norm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  grads.for_each([&](std::string_view, const Tensor& t) {
    for (double g : t.data()) sq += g * g;
  });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    grads.for_each([&](std::string_view, Tensor& t) {
      for (double& g : t.data()) g *= factor;
    });
  }
  return norm;
}

Adam::Adam(const ModelParams& like, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(ModelParams::zeros(like.dims)),
      v_(ModelParams::zeros(like.dims)) {}

void Adam::step(ModelParams& params, const ModelParams& grads) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  std::vector<Tensor*> ps, ms, vs;
  std::vector<const Tensor*> gs;
  params.for_each([&](std::string_view, Tensor& t) { ps.push_back(&t); });
  m_.for_each([&](std::string_view, Tensor& t) { ms.push_back(&t); });
  v_.for_each([&](std::string_view, Tensor& t) { vs.push_back(&t); });
  grads.for_each([&](std::string_view, const Tensor& t) { gs.push_back(&t); });
  for (std::size_t k = 0; k < ps.size(); ++k) {
    Tensor& p = *ps[k];
    Tensor& m = *ms[k];
    Tensor& v = *vs[k];
    const Tensor& g = *gs[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

TrainResult train(std::span<const SentencePair> dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  std::vector<TokenList> corpus;
  corpus.reserve(dataset.size() * 2);
  for (const auto& pair : dataset) {
    corpus.push_back(tokenize(pair.x));
    corpus.push_back(tokenize(pair.y));
  }
  return train(dataset, build_vocab(corpus, cfg.vocab_size, cfg.min_count), cfg, hooks);
}

TrainResult train(std::span<const SentencePair> dataset, Vocabulary vocab,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (dataset.empty()) throw ValidationError("train: empty dataset");

  TrainResult result{ModelParams::initialize(cfg.dims(vocab.size()), cfg.seed), std::move(vocab),
                     {}};
  std::vector<TrainingExample> examples;
  examples.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    bool truncated = false;
    examples.push_back(prepare_example(dataset[i], result.vocab, cfg.max_source_len,
                                       cfg.max_target_len, &truncated));
    if (truncated) {
      ++result.report.truncated_examples;
      if (hooks.warn) hooks.warn("example " + std::to_string(i + 1) + " truncated to length limits");
    }
  }

  ModelParams& params = result.params;
  ModelParams grads = ModelParams::zeros(params.dims);
  Adam adam(params, cfg.learning_rate);
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double total_loss = 0.0;
    std::size_t total_steps = 0, total_correct = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const std::size_t idx = order[pos];
      grads.for_each([](std::string_view, Tensor& t) { t.fill(0.0); });
      const LossStats stats = sequence_loss(examples[idx], params, &grads, cfg.gate);
      if (!std::isfinite(stats.loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", example " + std::to_string(idx + 1));
      }
      clip_global_norm(grads, cfg.clip_norm);
      adam.step(params, grads);
      total_loss += stats.loss;
      total_steps += stats.steps;
      total_correct += stats.correct;
    }
    EpochStats es;
    es.epoch = epoch;
    es.mean_nll = total_loss / static_cast<double>(examples.size());
    es.token_accuracy = static_cast<double>(total_correct) / static_cast<double>(total_steps);
    es.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(es);
    if (hooks.on_epoch) hooks.on_epoch(es);
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(epoch, params);
    }
  }
  return result;
}

} // namespace paragen
