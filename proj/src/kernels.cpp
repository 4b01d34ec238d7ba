#include "amc/kernels.hpp"

#include <algorithm>
#include <cstring>

#if defined(__x86_64__) || defined(_M_X64)
#define AMC_X86 1
#include <immintrin.h>
#else
#define AMC_X86 0
#endif

namespace amc::kern {

namespace scalar {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void add(std::size_t n, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum(std::size_t n, const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

void relu(std::size_t n, const double* x, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace scalar

#if AMC_X86
namespace avx2 {

__attribute__((target("avx2,fma")))
void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx2")))
void add(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

__attribute__((target("avx2")))
void mul(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i,
                         _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

__attribute__((target("avx2")))
void scale(std::size_t n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx2")))
double sum(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += x[i];
    return s;
}

__attribute__((target("avx2")))
void relu(std::size_t n, const double* x, double* out) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace avx2
#endif  // AMC_X86

namespace {

Backend detect() {
#if AMC_X86
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Backend::Avx2;
#endif
    return Backend::Scalar;
}

Backend g_backend = detect();

}  // namespace

Backend active_backend() { return g_backend; }
void force_backend(Backend b) {
#if !AMC_X86
    b = Backend::Scalar;
#endif
    g_backend = b;
}
void reset_backend() { g_backend = detect(); }

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Avx2: return "avx2";
        default: return "scalar";
    }
}

#if AMC_X86
#define AMC_DISPATCH(fn, ...)                                  \
    if (g_backend == Backend::Avx2) return avx2::fn(__VA_ARGS__); \
    return scalar::fn(__VA_ARGS__)
#else
#define AMC_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void axpy(std::size_t n, double a, const double* x, double* y) { AMC_DISPATCH(axpy, n, a, x, y); }
double dot(std::size_t n, const double* x, const double* y) { AMC_DISPATCH(dot, n, x, y); }
void add(std::size_t n, const double* x, const double* y, double* out) { AMC_DISPATCH(add, n, x, y, out); }
void mul(std::size_t n, const double* x, const double* y, double* out) { AMC_DISPATCH(mul, n, x, y, out); }
void scale(std::size_t n, double a, double* x) { AMC_DISPATCH(scale, n, a, x); }
double sum(std::size_t n, const double* x) { AMC_DISPATCH(sum, n, x); }
void relu(std::size_t n, const double* x, double* out) { AMC_DISPATCH(relu, n, x, out); }

#undef AMC_DISPATCH

void matmul(std::size_t m, std::size_t n, std::size_t p,
            const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * p * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * p;
        for (std::size_t k = 0; k < n; ++k) axpy(p, arow[k], b + k * p, crow);
    }
}

void matmul_at_b(std::size_t m, std::size_t n, std::size_t p,
                 const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * p * sizeof(double));
    for (std::size_t k = 0; k < n; ++k) {
        const double* arow = a + k * m;
        const double* brow = b + k * p;
        for (std::size_t i = 0; i < m; ++i) axpy(p, arow[i], brow, c + i * p);
    }
}

void matmul_a_bt(std::size_t m, std::size_t n, std::size_t p,
                 const double* a, const double* b, double* c, bool accumulate) {
    if (!accumulate) std::memset(c, 0, m * p * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * p;
        for (std::size_t j = 0; j < p; ++j) crow[j] += dot(n, arow, b + j * n);
    }
}

}  // namespace amc::kern
