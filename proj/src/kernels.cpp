#include "paragen/kernels.hpp"

#include <atomic>
#include <cstdint>

#include <omp.h>

namespace paragen::kernels {

namespace {

std::atomic<std::size_t> g_threshold{1u << 16};

inline double a_elem(const double* a, bool trans, std::size_t rows_stride_m, std::size_t i,
                     std::size_t p, std::size_t k) {
  // op(A)[i][p]; A stored m x k (no trans) or k x m (trans).
  return trans ? a[p * rows_stride_m + i] : a[i * k + p];
}

} // namespace

namespace serial {

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a + i * n;
    double acc = accumulate ? y[i] : 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y) {
  for (std::size_t i = 0; i < m; ++i) {
    const double gi = g[i];
    const double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * gi;
  }
}

void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x) {
  for (std::size_t i = 0; i < m; ++i) {
    const double gi = g[i];
    double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += gi * x[j];
  }
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a_elem(a, trans_a, m, i, p, k);
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
      } else {
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

} // namespace serial

namespace omp {

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* row = a + i * n;
    double acc = accumulate ? y[i] : 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y) {
  // Each thread owns a contiguous block of columns and sweeps the rows in
  // order, so reads stay row-major and per-element summation order matches.
#pragma omp parallel
  {
    const auto threads = static_cast<std::size_t>(omp_get_num_threads());
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t begin = n * t / threads;
    const std::size_t end = n * (t + 1) / threads;
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = g[i];
      const double* row = a + i * n;
      for (std::size_t j = begin; j < end; ++j) y[j] += row[j] * gi;
    }
  }
}

void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += gi * x[j];
  }
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a_elem(a, trans_a, m, static_cast<std::size_t>(i), p, k);
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
      } else {
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

} // namespace omp

std::size_t parallel_threshold() { return g_threshold.load(std::memory_order_relaxed); }
void set_parallel_threshold(std::size_t flops) {
  g_threshold.store(flops, std::memory_order_relaxed);
}

namespace {
bool go_parallel(std::size_t work) {
  return work >= parallel_threshold() && omp_get_max_threads() > 1 && !omp_in_parallel();
}
} // namespace

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate) {
  if (go_parallel(m * n)) {
    omp::gemv(a, m, n, x, y, accumulate);
  } else {
    serial::gemv(a, m, n, x, y, accumulate);
  }
}

void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y) {
  if (go_parallel(m * n)) {
    omp::gemv_t_acc(a, m, n, g, y);
  } else {
    serial::gemv_t_acc(a, m, n, g, y);
  }
}

void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x) {
  if (go_parallel(m * n)) {
    omp::ger_acc(a, m, n, g, x);
  } else {
    serial::ger_acc(a, m, n, g, x);
  }
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  if (go_parallel(m * n * k)) {
    omp::gemm(trans_a, trans_b, m, n, k, a, b, c, accumulate);
  } else {
    serial::gemm(trans_a, trans_b, m, n, k, a, b, c, accumulate);
  }
}

} // namespace paragen::kernels
