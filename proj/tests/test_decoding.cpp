#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "paragen/decoding.hpp"
#include "paragen/errors.hpp"
#include "paragen/random.hpp"

using namespace paragen;

namespace {

ModelParams random_params(const ModelDims& dims, std::uint64_t seed, double scale) {
  ModelParams p = ModelParams::zeros(dims);
  Rng rng(seed);
  p.for_each([&](std::string_view, Tensor& t) {
    for (double& x : t.data()) x = rng.uniform(-scale, scale);
  });
  return p;
}

Vocabulary toy_vocab(std::size_t words) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < words; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocabulary(tokens);
}

} // namespace

TEST(Render, FixedAndExtendedIds) {
  const Vocabulary v({"hello"});
  const SourceEncoding enc = encode_source(TokenList{"hello", "zyxxy"}, v);
  const std::vector<std::size_t> ids = {Vocabulary::kBos, v.id("hello"), v.size(), Vocabulary::kEos};
  EXPECT_EQ(render(ids, enc.vocab), (TokenList{"hello", "zyxxy"}));
  const std::vector<std::size_t> specials = {0, 2, 3, 2};
  EXPECT_TRUE(render(specials, enc.vocab).empty());
  const std::vector<std::size_t> unk = {Vocabulary::kUnk};
  EXPECT_EQ(render(unk, enc.vocab), (TokenList{"<unk>"}));
  const std::vector<std::size_t> bad = {v.size() + 1};
  EXPECT_THROW(render(bad, enc.vocab), ValidationError);
}

TEST(Render, InvertsSourceEncoding) {
  const Vocabulary v({"a", "b"});
  const TokenList src = {"a", "qq", "b", "qq", "rr"};
  const SourceEncoding enc = encode_source(src, v);
  EXPECT_EQ(render(enc.ids, enc.vocab), src);
}

TEST(Greedy, EmptySourceAndZeroLength) {
  const Vocabulary v = toy_vocab(4);
  const ModelParams p = ModelParams::initialize(ModelDims{v.size(), 4, 4, 4, 4}, 1);
  EXPECT_THROW(greedy_decode("", p, v, 5), ValidationError);
  EXPECT_TRUE(greedy_decode("t0 t1", p, v, 0).empty());
}

TEST(Greedy, TiesGoToLowestId) {
  // Zero weights: uniform vocabulary half, uniform attention over two distinct
  // source tokens, so both source tokens tie at the top.
  const Vocabulary v = toy_vocab(8);
  const ModelParams p = ModelParams::zeros(ModelDims{v.size(), 4, 4, 4, 4});
  const SourceEncoding enc = encode_source(TokenList{"t3", "t1"}, v);
  const auto ids = greedy_ids(enc, p, 3);
  EXPECT_EQ(ids, (std::vector<std::size_t>(3, v.id("t1"))));
  EXPECT_EQ(ids, greedy_ids(enc, p, 3));
}

TEST(Beam, WidthOneEqualsGreedy) {
  const Vocabulary v = toy_vocab(6);
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const ModelParams p = random_params(ModelDims{v.size(), 6, 5, 5, 4}, 40 + trial, 1.5);
    TokenList src;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      src.push_back(rng.below(4) == 0 ? "oov" + std::to_string(rng.below(3))
                                      : "t" + std::to_string(rng.below(6)));
    }
    const SourceEncoding enc = encode_source(src, v);
    BeamConfig cfg;
    cfg.beam_width = 1;
    cfg.max_length = 8;
    const auto beam = beam_search(enc, p, cfg);
    ASSERT_FALSE(beam.empty());
    EXPECT_EQ(beam.front().ids, greedy_ids(enc, p, 8));
  }
}

TEST(Beam, ExhaustiveEnumerationOnTwoStepModel) {
  const Vocabulary v = toy_vocab(2);  // 6 fixed ids
  for (int trial = 0; trial < 10; ++trial) {
    const ModelParams p = random_params(ModelDims{v.size(), 4, 4, 4, 4}, 900 + trial, 2.0);
    const SourceEncoding enc = encode_source(TokenList{"t0", "xa", "xb"}, v);
    const std::size_t V = enc.vocab.size();
    ASSERT_EQ(V, 8u);
    for (double alpha : {0.0, 0.7, 1.0}) {
      BeamConfig cfg;
      cfg.beam_width = V;
      cfg.max_length = 2;
      cfg.length_penalty = alpha;
      const auto beam = beam_search(enc, p, cfg);

      std::vector<std::size_t> best;
      double best_score = -INFINITY;
      auto consider = [&](std::vector<std::size_t> ids) {
        const double s = length_normalized_score(sequence_log_prob(enc, ids, p), ids.size(), alpha);
        if (s > best_score) {
          best_score = s;
          best = ids;
        }
      };
      consider({Vocabulary::kEos});
      for (std::size_t a = 0; a < V; ++a) {
        if (a == Vocabulary::kEos) continue;
        for (std::size_t b = 0; b < V; ++b) consider({a, b});
      }
      EXPECT_EQ(beam.front().ids, best) << "alpha " << alpha;
      EXPECT_NEAR(beam.front().score, best_score, 1e-12);
    }
  }
}

TEST(Beam, LengthPenaltyFlipsRanking) {
  // Short: log-prob -2 over 2 tokens. Long: -3 over 6 tokens.
  EXPECT_GT(length_normalized_score(-2.0, 2, 0.0), length_normalized_score(-3.0, 6, 0.0));
  EXPECT_LT(length_normalized_score(-2.0, 2, 1.0), length_normalized_score(-3.0, 6, 1.0));
  EXPECT_DOUBLE_EQ(length_normalized_score(-3.0, 6, 1.0), -0.5);
}

TEST(Beam, ScoresReplayAndRankingIsSorted) {
  const Vocabulary v = toy_vocab(5);
  const ModelParams p = random_params(ModelDims{v.size(), 5, 5, 5, 5}, 8, 1.0);
  const SourceEncoding enc = encode_source(TokenList{"t1", "zz", "t4", "t2"}, v);
  BeamConfig cfg;
  cfg.beam_width = 4;
  cfg.max_length = 6;
  const auto beam = beam_search(enc, p, cfg);
  ASSERT_FALSE(beam.empty());
  for (std::size_t i = 0; i < beam.size(); ++i) {
    EXPECT_NEAR(beam[i].log_prob, sequence_log_prob(enc, beam[i].ids, p), 1e-9);
    EXPECT_EQ(beam[i].finished, !beam[i].ids.empty() && beam[i].ids.back() == Vocabulary::kEos);
    if (i > 0) {
      EXPECT_GE(beam[i - 1].score, beam[i].score);
    }
  }
}

TEST(Beam, LogProbNonIncreasingAlongPrefixes) {
  const Vocabulary v = toy_vocab(5);
  const ModelParams p = random_params(ModelDims{v.size(), 5, 5, 5, 5}, 12, 1.0);
  const SourceEncoding enc = encode_source(TokenList{"t0", "t3"}, v);
  BeamConfig cfg;
  cfg.max_length = 5;
  for (const auto& h : beam_search(enc, p, cfg)) {
    double prev = 0.0;
    for (std::size_t len = 1; len <= h.ids.size(); ++len) {
      const std::vector<std::size_t> prefix(h.ids.begin(), h.ids.begin() + static_cast<std::ptrdiff_t>(len));
      const double lp = sequence_log_prob(enc, prefix, p);
      EXPECT_LE(lp, prev + 1e-15);
      prev = lp;
    }
  }
}

TEST(BeamConfig, Validation) {
  BeamConfig cfg;
  cfg.beam_width = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = BeamConfig{};
  cfg.length_penalty = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
