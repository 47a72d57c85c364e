#include "paragen/ops.hpp"

#include <algorithm>
#include <cmath>

#include "paragen/errors.hpp"
#include "paragen/kernels.hpp"

namespace paragen::ops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_vector(const Tensor& v, const char* what) {
  if (v.rank() != 1) {
    throw DimensionError(std::string(what) + ": expected a vector, got " +
                         shape_string(v.shape()));
  }
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  Tensor out({a.rows(), b.cols()});
  kernels::gemm(false, false, a.rows(), b.cols(), a.cols(), a.raw(), b.raw(), out.raw(), false);
  return out;
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.size()) {
    throw DimensionError("matvec: incompatible shapes " + shape_string(w.shape()) + " and " +
                         shape_string(x.shape()));
  }
  Tensor out({w.rows()});
  kernels::gemv(w.raw(), w.rows(), w.cols(), x.raw(), out.raw(), false);
  return out;
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a[i * c + j];
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_vector(a, "concat");
  require_vector(b, "concat");
  std::vector<double> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return Tensor::vector(std::move(data));
}

Tensor tanh_op(const Tensor& v) {
  Tensor out = v;
  for (double& x : out.data()) x = std::tanh(x);
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid_op(const Tensor& v) {
  Tensor out = v;
  for (double& x : out.data()) x = sigmoid(x);
  return out;
}

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) {
    throw DimensionError("softmax: empty input");
  }
  const double peak = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

Tensor softmax(const Tensor& v) {
  require_vector(v, "softmax");
  return Tensor::vector(softmax(v.data()));
}

double log_clamped(double x, double floor) { return std::log(std::max(x, floor)); }

} // namespace paragen::ops
