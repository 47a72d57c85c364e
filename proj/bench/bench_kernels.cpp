// Serial reference kernels against their OpenMP counterparts, plus the
// end-to-end mining pass at different thread counts.

#include <benchmark/benchmark.h>

#include <vector>

#include "paragen/corpus.hpp"
#include "paragen/kernels.hpp"
#include "paragen/random.hpp"
#include "paragen/synthetic.hpp"

namespace {

using namespace paragen;

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

template <bool Parallel>
void BM_Gemv(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto a = random_buffer(m * n, 1), x = random_buffer(n, 2);
  std::vector<double> y(m);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::gemv(a.data(), m, n, x.data(), y.data(), false);
    } else {
      kernels::serial::gemv(a.data(), m, n, x.data(), y.data(), false);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n));
}

template <bool Parallel>
void BM_GemvT(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto a = random_buffer(m * n, 1), g = random_buffer(m, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::gemv_t_acc(a.data(), m, n, g.data(), y.data());
    } else {
      kernels::serial::gemv_t_acc(a.data(), m, n, g.data(), y.data());
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n));
}

template <bool Parallel>
void BM_Ger(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  auto a = random_buffer(m * n, 1);
  const auto g = random_buffer(m, 2), x = random_buffer(n, 3);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::ger_acc(a.data(), m, n, g.data(), x.data());
    } else {
      kernels::serial::ger_acc(a.data(), m, n, g.data(), x.data());
    }
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n));
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_buffer(n * n, 1), b = random_buffer(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    } else {
      kernels::serial::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

void matrix_shapes(benchmark::internal::Benchmark* b) {
  // Decoder-sized (vocabulary projection at desk scale) up to larger layers.
  for (auto [m, n] : {std::pair{256, 128}, {5000, 128}, {20000, 256}}) b->Args({m, n});
}

BENCHMARK(BM_Gemv<false>)->Apply(matrix_shapes);
BENCHMARK(BM_Gemv<true>)->Apply(matrix_shapes);
BENCHMARK(BM_GemvT<false>)->Apply(matrix_shapes);
BENCHMARK(BM_GemvT<true>)->Apply(matrix_shapes);
BENCHMARK(BM_Ger<false>)->Apply(matrix_shapes);
BENCHMARK(BM_Ger<true>)->Apply(matrix_shapes);
BENCHMARK(BM_Gemm<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Arg(64)->Arg(256);

void BM_Align(benchmark::State& state) {
  PlantedCorpusConfig corpus_cfg;
  corpus_cfg.distractors = 2000;
  const PlantedCorpus corpus = make_planted_corpus(corpus_cfg);
  MineConfig cfg;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const MineResult r = align(corpus.documents, cfg);
    benchmark::DoNotOptimize(r.pairs.data());
  }
}
BENCHMARK(BM_Align)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
