// kernels.hpp - data-parallel inner loops for the tensor library
//
// Every kernel has a scalar reference implementation and (on x86-64) an
// AVX2 variant. Dispatch is resolved once at startup from CPUID; the
// active backend can be forced via force_backend() for equivalence tests.

#pragma once

#include <cstddef>
#include <string_view>

namespace amc::kern {

enum class Backend { Scalar, Avx2 };

// Backend selected at startup (best available), unless forced.
Backend active_backend();
void force_backend(Backend b);
void reset_backend();
std::string_view backend_name(Backend b);

// y[i] += a * x[i]
void axpy(std::size_t n, double a, const double* x, double* y);
// sum_i x[i] * y[i]
double dot(std::size_t n, const double* x, const double* y);
// out[i] = x[i] + y[i]
void add(std::size_t n, const double* x, const double* y, double* out);
// out[i] = x[i] * y[i]
void mul(std::size_t n, const double* x, const double* y, double* out);
// x[i] *= a
void scale(std::size_t n, double a, double* x);
// sum_i x[i]
double sum(std::size_t n, const double* x);
// out[i] = max(x[i], 0)
void relu(std::size_t n, const double* x, double* out);

// Scalar reference implementations, always available (oracles for the
// dispatch equivalence tests).
namespace scalar {
void axpy(std::size_t n, double a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void add(std::size_t n, const double* x, const double* y, double* out);
void mul(std::size_t n, const double* x, const double* y, double* out);
void scale(std::size_t n, double a, double* x);
double sum(std::size_t n, const double* x);
void relu(std::size_t n, const double* x, double* out);
}  // namespace scalar

// Row-major matmul C[m x p] = A[m x n] * B[n x p], built on axpy so the
// inner loop vectorizes regardless of p. accumulate=false zeroes C first.
void matmul(std::size_t m, std::size_t n, std::size_t p,
            const double* a, const double* b, double* c,
            bool accumulate = false);
// C[m x p] += A^T[m x n] * B[n x p] where A is stored [n x m]
void matmul_at_b(std::size_t m, std::size_t n, std::size_t p,
                 const double* a, const double* b, double* c,
                 bool accumulate = false);
// C[m x p] = A[m x n] * B^T[p x n]
void matmul_a_bt(std::size_t m, std::size_t n, std::size_t p,
                 const double* a, const double* b, double* c,
                 bool accumulate = false);

}  // namespace amc::kern
