#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "paragen/tensor.hpp"

namespace paragen {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Scalar objective over a list of named tensors. When `grads` is non-null it
/// must be filled with the analytic gradient (one tensor per input, same shape).
using Objective =
    std::function<double(std::span<const NamedTensor> params, std::vector<Tensor>* grads)>;

struct GradCheckOptions {
  double step = 1e-5;
  // 0 lets OpenMP decide.
  int threads = 0;
};

struct ParamGradError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t elements_checked = 0;
  std::vector<ParamGradError> per_param;
};

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares the objective's analytic gradient against central differences
/// (f(x+h) - f(x-h)) / 2h for every element of every input. Elements are
/// spread over OpenMP threads, each with a private copy of the inputs.
///
/// Throws NumericalError naming the parameter when the objective turns
/// non-finite, ValidationError when the step is outside [1e-6, 1e-4].
GradCheckReport grad_check(const Objective& objective, std::span<const NamedTensor> params,
                           const GradCheckOptions& options = {});

} // namespace paragen
