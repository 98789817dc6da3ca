#pragma once

#include <cstddef>

namespace btm::kernels {

// Dense row-major kernels. Every parallel loop assigns each output element
// to exactly one iteration with a serial inner accumulation, so results are
// bit-identical to the serial reference for any thread count or schedule.

// C(m x n) = A(m x k) * B(k x n)
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);

// C(m x n) = A(m x k) * B(n x k)^T
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);

// C(m x n) = A(k x m)^T * B(k x n)
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);

// In-place Givens rotation of two length-n arrays:
//   x <- cos*x - sin*y,  y <- sin*x + cos*y
void rotate_pair(double* x, double* y, std::size_t n, double cos_v, double sin_v);

// Serial reference implementations, kept for equivalence tests and benchmarks.
namespace ref {

void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n);
void rotate_pair(double* x, double* y, std::size_t n, double cos_v, double sin_v);

}  // namespace ref

}  // namespace btm::kernels
