#include "paragen/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include <omp.h>

#include "paragen/errors.hpp"

namespace paragen {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const Objective& objective, std::span<const NamedTensor> params,
                           const GradCheckOptions& options) {
  const double h = options.step;
  if (!(h >= 1e-6 && h <= 1e-4)) {
    throw ValidationError("grad_check: step " + std::to_string(h) + " outside [1e-6, 1e-4]");
  }

  std::vector<Tensor> analytic;
  const double base = objective(params, &analytic);
  if (!std::isfinite(base)) {
    throw NumericalError("grad_check: objective is non-finite at the base point");
  }
  if (analytic.size() != params.size()) {
    throw DimensionError("grad_check: objective returned " + std::to_string(analytic.size()) +
                         " gradients for " + std::to_string(params.size()) + " inputs");
  }

  // Flatten (param, element) pairs so threads split the work evenly.
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!analytic[p].same_shape(params[p].value)) {
      throw DimensionError("grad_check: gradient for " + params[p].name + " has shape " +
                           shape_string(analytic[p].shape()));
    }
    for (std::size_t i = 0; i < params[p].value.size(); ++i) slots.emplace_back(p, i);
  }
  std::vector<double> numeric(slots.size(), 0.0);
  std::optional<std::string> failure;

  const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(slots.size());
#pragma omp parallel num_threads(threads)
  {
    std::vector<NamedTensor> local(params.begin(), params.end());
#pragma omp for schedule(static)
    for (std::int64_t s = 0; s < count; ++s) {
      const auto [p, i] = slots[static_cast<std::size_t>(s)];
      double& x = local[p].value[i];
      const double saved = x;
      x = saved + h;
      const double plus = objective(local, nullptr);
      x = saved - h;
      const double minus = objective(local, nullptr);
      x = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
#pragma omp critical
        if (!failure) failure = params[p].name + "[" + std::to_string(i) + "]";
        continue;
      }
      numeric[static_cast<std::size_t>(s)] = (plus - minus) / (2.0 * h);
    }
  }
  if (failure) {
    throw NumericalError("grad_check: non-finite objective when perturbing " + *failure);
  }

  GradCheckReport report;
  report.elements_checked = slots.size();
  report.per_param.resize(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) report.per_param[p].name = params[p].name;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto [p, i] = slots[s];
    const double a = analytic[p][i];
    const double err = relative_error(a, numeric[s]);
    ParamGradError& entry = report.per_param[p];
    if (err > entry.max_rel_error) {
      entry.max_rel_error = err;
      entry.worst_index = i;
      entry.analytic = a;
      entry.numeric = numeric[s];
    }
    if (err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_param = params[p].name;
      report.worst_index = i;
    }
  }
  return report;
}

} // namespace paragen
