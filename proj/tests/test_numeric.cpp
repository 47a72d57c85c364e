#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <omp.h>

#include "paragen/errors.hpp"
#include "paragen/grad_check.hpp"
#include "paragen/kernels.hpp"
#include "paragen/ops.hpp"
#include "paragen/random.hpp"
#include "paragen/tape.hpp"

using namespace paragen;

namespace {

Tensor random_tensor(Tensor::Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = rng.uniform(-scale, scale);
  return t;
}

std::vector<double> random_buffer(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

} // namespace

TEST(Tensor, ShapeInvariants) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_THROW(Tensor({0, 3}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1.0, 2.0}), DimensionError);
  EXPECT_THROW(Tensor({1, 1, 1, 1}), DimensionError);
  Tensor d;
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], 0.0);
}

TEST(Ops, MatmulExamples) {
  const Tensor id = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor col = Tensor::matrix({{3}, {4}});
  EXPECT_EQ(ops::matmul(id, col), col);
  EXPECT_EQ(ops::matmul(Tensor::matrix({{1, 2}}), col), Tensor::matrix({{11}}));
}

TEST(Ops, MatmulMatchesTripleLoop) {
  Rng rng(7);
  const Tensor a = random_tensor({3, 4}, rng);
  const Tensor b = random_tensor({4, 2}, rng);
  const Tensor c = ops::matmul(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), acc, 1e-15);
    }
  }
}

TEST(Ops, MatmulShapeErrorNamesBothShapes) {
  try {
    ops::matmul(Tensor({2, 3}), Tensor({2, 3}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Ops, MatmulAssociativity) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor({4, 5}, rng);
    const Tensor b = random_tensor({5, 3}, rng);
    const Tensor c = random_tensor({3, 6}, rng);
    const Tensor left = ops::matmul(ops::matmul(a, b), c);
    const Tensor right = ops::matmul(a, ops::matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) {
      EXPECT_LE(std::abs(left[i] - right[i]), 1e-9 * std::max(1.0, std::abs(left[i])));
    }
  }
}

TEST(Ops, SoftmaxExamples) {
  EXPECT_EQ(ops::softmax(Tensor::vector({0, 0})), Tensor::vector({0.5, 0.5}));
  const Tensor big = ops::softmax(Tensor::vector({1000, 1000, 1000}));
  for (double x : big.data()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(ops::softmax(std::span<const double>{}), DimensionError);
}

TEST(Ops, SoftmaxMatchesExtendedPrecision) {
  const Tensor s = ops::softmax(Tensor::vector({1, 2, 3}));
  const long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
  EXPECT_NEAR(s[0], static_cast<double>(std::exp(1.0L) / z), 2e-16);
  EXPECT_NEAR(s[1], static_cast<double>(std::exp(2.0L) / z), 2e-16);
  EXPECT_NEAR(s[2], static_cast<double>(std::exp(3.0L) / z), 2e-16);
}

TEST(Ops, SoftmaxSumsToOneForLargeInputs) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor v = random_tensor({1 + rng.below(30)}, rng, 1000.0);
    const Tensor s = ops::softmax(v);
    double sum = 0.0;
    for (double x : s.data()) {
      EXPECT_GT(x, -1e-300);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Ops, ElementwiseAndConcat) {
  EXPECT_EQ(ops::tanh_op(Tensor::vector({0}))[0], 0.0);
  EXPECT_EQ(ops::sigmoid_op(Tensor::vector({0}))[0], 0.5);
  EXPECT_EQ(ops::concat(Tensor::vector({1, 2}), Tensor::vector({3})), Tensor::vector({1, 2, 3}));
  EXPECT_EQ(ops::add(Tensor::vector({1, 2}), Tensor::vector({3, 4})), Tensor::vector({4, 6}));
  EXPECT_EQ(ops::mul(Tensor::vector({1, 2}), Tensor::vector({3, 4})), Tensor::vector({3, 8}));
  EXPECT_THROW(ops::add(Tensor::vector({1, 2}), Tensor::vector({3})), DimensionError);
}

TEST(Ops, SigmoidSaturatesFinite) {
  const double hi = ops::sigmoid(40.0), lo = ops::sigmoid(-40.0);
  EXPECT_TRUE(std::isfinite(hi) && std::isfinite(lo));
  EXPECT_NEAR(hi, 1.0, 1e-12);
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_NEAR(lo, static_cast<double>(1.0L / (1.0L + std::exp(40.0L))), 1e-30);
}

TEST(Ops, LogClampedFloorsZero) {
  EXPECT_EQ(ops::log_clamped(0.0), std::log(1e-12));
  EXPECT_EQ(ops::log_clamped(0.5), std::log(0.5));
}

TEST(Kernels, SerialAndParallelAreBitIdentical) {
  Rng rng(5);
  omp_set_num_threads(4);
  for (auto [m, n, k] : {std::tuple{1, 1, 1}, {7, 13, 5}, {64, 33, 17}, {129, 70, 65}}) {
    const auto a = random_buffer(static_cast<std::size_t>(m * k), rng);
    const auto b = random_buffer(static_cast<std::size_t>(k * n), rng);
    const auto x = random_buffer(static_cast<std::size_t>(k), rng);
    const auto g = random_buffer(static_cast<std::size_t>(m), rng);
    const auto mm = static_cast<std::size_t>(m), nn = static_cast<std::size_t>(n),
               kk = static_cast<std::size_t>(k);

    std::vector<double> y1(mm, 0.5), y2(mm, 0.5);
    kernels::serial::gemv(a.data(), mm, kk, x.data(), y1.data(), true);
    kernels::omp::gemv(a.data(), mm, kk, x.data(), y2.data(), true);
    EXPECT_EQ(y1, y2);

    std::vector<double> t1(kk, 0.25), t2(kk, 0.25);
    kernels::serial::gemv_t_acc(a.data(), mm, kk, g.data(), t1.data());
    kernels::omp::gemv_t_acc(a.data(), mm, kk, g.data(), t2.data());
    EXPECT_EQ(t1, t2);

    auto o1 = a, o2 = a;
    kernels::serial::ger_acc(o1.data(), mm, kk, g.data(), x.data());
    kernels::omp::ger_acc(o2.data(), mm, kk, g.data(), x.data());
    EXPECT_EQ(o1, o2);

    for (bool ta : {false, true}) {
      for (bool tb : {false, true}) {
        std::vector<double> c1(mm * nn, 1.0), c2(mm * nn, 1.0);
        kernels::serial::gemm(ta, tb, mm, nn, kk, a.data(), b.data(), c1.data(), tb);
        kernels::omp::gemm(ta, tb, mm, nn, kk, a.data(), b.data(), c2.data(), tb);
        EXPECT_EQ(c1, c2);
      }
    }
  }
}

TEST(Kernels, DispatchThresholdDoesNotChangeResults) {
  Rng rng(9);
  const auto a = random_buffer(300 * 200, rng);
  const auto x = random_buffer(200, rng);
  std::vector<double> y_serial(300), y_dispatch(300);
  kernels::serial::gemv(a.data(), 300, 200, x.data(), y_serial.data(), false);
  const std::size_t saved = kernels::parallel_threshold();
  kernels::set_parallel_threshold(1);
  kernels::gemv(a.data(), 300, 200, x.data(), y_dispatch.data(), false);
  kernels::set_parallel_threshold(saved);
  EXPECT_EQ(y_serial, y_dispatch);
}

// Every recorded op: analytic gradient of a random projection of its output
// against central differences.
TEST(Tape, OpGradientsMatchFiniteDifferences) {
  using Build = std::function<Var(Tape&, std::span<const Var>)>;
  struct Case {
    const char* name;
    std::vector<Tensor::Shape> shapes;
    Build build;
  };
  const std::vector<std::size_t> idx = {2, 0, 2};
  const std::vector<Case> cases = {
      {"matvec", {{3, 4}, {4}}, [](Tape& t, auto v) { return t.matvec(v[0], v[1]); }},
      {"matmul", {{3, 4}, {4, 2}}, [](Tape& t, auto v) { return t.matmul(v[0], v[1]); }},
      {"transpose", {{3, 2}}, [](Tape& t, auto v) { return t.transpose(v[0]); }},
      {"add", {{5}, {5}}, [](Tape& t, auto v) { return t.add(v[0], v[1]); }},
      {"add_rows", {{3, 4}, {4}}, [](Tape& t, auto v) { return t.add_rows(v[0], v[1]); }},
      {"mul", {{5}, {5}}, [](Tape& t, auto v) { return t.mul(v[0], v[1]); }},
      {"scale", {{5}, {1}}, [](Tape& t, auto v) { return t.scale(v[0], v[1]); }},
      {"one_minus", {{3}}, [](Tape& t, auto v) { return t.one_minus(v[0]); }},
      {"neg", {{3}}, [](Tape& t, auto v) { return t.neg(v[0]); }},
      {"tanh", {{6}}, [](Tape& t, auto v) { return t.tanh(v[0]); }},
      {"sigmoid", {{6}}, [](Tape& t, auto v) { return t.sigmoid(v[0]); }},
      {"softmax", {{6}}, [](Tape& t, auto v) { return t.softmax(v[0]); }},
      {"log_clamped", {{4}}, [](Tape& t, auto v) { return t.log_clamped(t.sigmoid(v[0])); }},
      {"concat", {{2}, {3}}, [](Tape& t, auto v) { return t.concat({v[0], v[1]}); }},
      {"slice", {{6}}, [](Tape& t, auto v) { return t.slice(v[0], 1, 3); }},
      {"columns", {{3, 5}}, [](Tape& t, auto v) { return t.columns(v[0], 1, 3); }},
      {"gather_rows", {{4, 3}}, [&idx](Tape& t, auto v) { return t.gather_rows(v[0], idx); }},
      {"row", {{4, 3}}, [](Tape& t, auto v) { return t.row(v[0], 2); }},
      {"stack", {{3}, {3}}, [](Tape& t, auto v) { return t.stack(v); }},
      {"pad", {{3}}, [](Tape& t, auto v) { return t.pad(v[0], 5); }},
      {"scatter_add", {{3}}, [&idx](Tape& t, auto v) { return t.scatter_add(v[0], idx, 4); }},
      {"pick", {{4}}, [](Tape& t, auto v) { return t.pick(v[0], 2); }},
      {"sum", {{4}}, [](Tape& t, auto v) { return t.sum(v[0]); }},
      {"mean", {{1}, {1}}, [](Tape& t, auto v) { return t.mean(v); }},
  };

  Rng rng(13);
  for (const auto& c : cases) {
    std::vector<NamedTensor> inputs;
    for (std::size_t i = 0; i < c.shapes.size(); ++i) {
      inputs.push_back({std::string(c.name) + "." + std::to_string(i), random_tensor(c.shapes[i], rng)});
    }
    // Fixed random projection weights so the objective is a scalar.
    Tape probe;
    std::vector<Var> pv;
    for (const auto& in : inputs) pv.push_back(probe.constant(in.value));
    const Tensor proj = random_tensor(probe.value(c.build(probe, pv)).shape(), rng);

    const Objective f = [&](std::span<const NamedTensor> params, std::vector<Tensor>* grads) {
      Tape tape;
      std::vector<Var> vars;
      std::vector<Tensor> sinks;
      for (const auto& p : params) sinks.emplace_back(p.value.shape());
      for (std::size_t i = 0; i < params.size(); ++i) {
        vars.push_back(tape.parameter(params[i].value, &sinks[i]));
      }
      const Var out = c.build(tape, vars);
      const Var obj = tape.sum(tape.mul(out, tape.constant(proj)));
      if (grads) {
        tape.backward(obj);
        *grads = sinks;
      }
      return tape.scalar(obj);
    };
    const GradCheckReport r = grad_check(f, inputs);
    EXPECT_LE(r.max_rel_error, 1e-6) << c.name << " worst " << r.worst_param << "[" << r.worst_index << "]";
  }
}

TEST(Tape, UnreachableParametersKeepZeroGradient) {
  Tape tape;
  const Tensor a = Tensor::vector({1, 2}), b = Tensor::vector({3, 4});
  Tensor ga({2}), gb({2});
  const Var va = tape.parameter(a, &ga);
  tape.parameter(b, &gb);
  tape.backward(tape.sum(tape.tanh(va)));
  EXPECT_EQ(gb, Tensor({2}));
  EXPECT_NE(ga, Tensor({2}));
}

TEST(GradCheck, Square) {
  const Objective f = [](std::span<const NamedTensor> p, std::vector<Tensor>* g) {
    const double x = p[0].value[0];
    if (g) *g = {Tensor::vector({2 * x})};
    return x * x;
  };
  const std::vector<NamedTensor> params = {{"x", Tensor::vector({3.0})}};
  EXPECT_LT(grad_check(f, params).max_rel_error, 1e-10);
}

TEST(GradCheck, SoftmaxSumHasZeroGradient) {
  const Objective f = [](std::span<const NamedTensor> p, std::vector<Tensor>* g) {
    Tape tape;
    Tensor sink(p[0].value.shape());
    const Var x = tape.parameter(p[0].value, &sink);
    const Var s = tape.sum(tape.softmax(x));
    if (g) {
      tape.backward(s);
      *g = {sink};
    }
    return tape.scalar(s);
  };
  const std::vector<NamedTensor> params = {{"x", Tensor::vector({0.3, -1.2, 2.0, 0.0})}};
  std::vector<Tensor> grads;
  f(params, &grads);
  for (double v : grads[0].data()) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(GradCheck, RejectsStepOutsideRange) {
  const Objective f = [](std::span<const NamedTensor>, std::vector<Tensor>*) { return 0.0; };
  const std::vector<NamedTensor> params = {{"x", Tensor::vector({1.0})}};
  EXPECT_THROW(grad_check(f, params, {1e-3, 0}), ValidationError);
  EXPECT_THROW(grad_check(f, params, {1e-7, 0}), ValidationError);
}

TEST(GradCheck, NonFiniteLossNamesParameter) {
  const Objective f = [](std::span<const NamedTensor> p, std::vector<Tensor>* g) {
    if (g) *g = {Tensor({1}), Tensor({1})};
    return std::log(p[1].value[0]);
  };
  const std::vector<NamedTensor> params = {{"fine", Tensor::vector({1.0})},
                                           {"offender", Tensor::vector({1e-6})}};
  try {
    grad_check(f, params);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("offender"), std::string::npos) << e.what();
  }
}

TEST(GradCheck, RelativeErrorDefinition) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(1.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(1e-10, 0.0), 1e-2);
}
