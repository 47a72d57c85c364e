#pragma once

#include <span>
#include <vector>

#include "paragen/tensor.hpp"

// Forward-only tensor arithmetic. The recording versions in tape.hpp call into
// these for their forward values.
namespace paragen::ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& w, const Tensor& x);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor concat(const Tensor& a, const Tensor& b);

Tensor tanh_op(const Tensor& v);
Tensor sigmoid_op(const Tensor& v);

// Numerically stable logistic function.
double sigmoid(double x);

// Max-subtracted softmax over a nonempty span. Throws DimensionError on empty.
std::vector<double> softmax(std::span<const double> v);
Tensor softmax(const Tensor& v);

// log(max(x, floor)); keeps exact zeros from turning into -inf.
inline constexpr double kLogFloor = 1e-12;
double log_clamped(double x, double floor = kLogFloor);

} // namespace paragen::ops
