#pragma once

#include <cstddef>

// Dense linear-algebra kernels on row-major buffers.
//
// `serial::` holds the reference loops. `omp::` splits the outermost output
// dimension across OpenMP threads; every output element is still accumulated
// in the same order as the serial loop, so both variants are bit-identical.
// The unqualified entry points pick one based on problem size.
namespace paragen::kernels {

namespace serial {

// y = A x, or y += A x when accumulate is set. A is m x n.
void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate);
// y += A^T g. A is m x n, g has m entries, y has n.
void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y);
// A += g x^T. A is m x n.
void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x);
// C = op(A) op(B) (or +=). C is m x n, inner dimension k.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

} // namespace serial

namespace omp {

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate);
void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y);
void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x);
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

} // namespace omp

// Work (multiply-adds) at or above which the dispatching kernels go parallel.
std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t flops);

void gemv(const double* a, std::size_t m, std::size_t n, const double* x, double* y,
          bool accumulate);
void gemv_t_acc(const double* a, std::size_t m, std::size_t n, const double* g, double* y);
void ger_acc(double* a, std::size_t m, std::size_t n, const double* g, const double* x);
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

} // namespace paragen::kernels
