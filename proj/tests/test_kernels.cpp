// Scalar oracles for every kernel, plus scalar-vs-AVX2 dispatch equivalence
// across awkward lengths (tails, single elements, empty).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "amc/kernels.hpp"

using namespace amc;

namespace {

std::vector<double> randvec(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

bool avx2_available() { return kern::active_backend() == kern::Backend::Avx2; }

}  // namespace

TEST_CASE("scalar kernels match hand oracles") {
    std::vector<double> x{1.0, -2.0, 3.0};
    std::vector<double> y{0.5, 0.5, 0.5};
    std::vector<double> out(3);

    std::vector<double> acc = y;
    kern::scalar::axpy(3, 2.0, x.data(), acc.data());
    CHECK(acc[0] == doctest::Approx(2.5));
    CHECK(acc[1] == doctest::Approx(-3.5));
    CHECK(acc[2] == doctest::Approx(6.5));

    CHECK(kern::scalar::dot(3, x.data(), y.data()) == doctest::Approx(1.0));
    CHECK(kern::scalar::sum(3, x.data()) == doctest::Approx(2.0));

    kern::scalar::add(3, x.data(), y.data(), out.data());
    CHECK(out[1] == doctest::Approx(-1.5));
    kern::scalar::mul(3, x.data(), y.data(), out.data());
    CHECK(out[2] == doctest::Approx(1.5));

    std::vector<double> s = x;
    kern::scalar::scale(3, -1.0, s.data());
    CHECK(s[0] == doctest::Approx(-1.0));

    kern::scalar::relu(3, x.data(), out.data());
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 3.0);
}

TEST_CASE("dispatched kernels agree with scalar reference on every backend") {
    if (!avx2_available()) {
        MESSAGE("AVX2 not available; dispatch equivalence is vacuous here");
        return;
    }
    std::mt19937_64 rng(7);
    // lengths straddling the 4-wide vector body and its tail
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 64u, 257u}) {
        auto x = randvec(n, rng);
        auto y = randvec(n, rng);

        std::vector<double> ys = y, yv = y, outs(n), outv(n);
        kern::scalar::axpy(n, 1.7, x.data(), ys.data());
        kern::force_backend(kern::Backend::Avx2);
        kern::axpy(n, 1.7, x.data(), yv.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-12));

        double ds = kern::scalar::dot(n, x.data(), y.data());
        CHECK(kern::dot(n, x.data(), y.data()) == doctest::Approx(ds).epsilon(1e-12));
        double ss = kern::scalar::sum(n, x.data());
        CHECK(kern::sum(n, x.data()) == doctest::Approx(ss).epsilon(1e-12));

        kern::scalar::add(n, x.data(), y.data(), outs.data());
        kern::add(n, x.data(), y.data(), outv.data());
        CHECK(outs == outv);  // exact: same adds, elementwise

        kern::scalar::mul(n, x.data(), y.data(), outs.data());
        kern::mul(n, x.data(), y.data(), outv.data());
        CHECK(outs == outv);

        std::vector<double> s1 = x, s2 = x;
        kern::scalar::scale(n, 0.37, s1.data());
        kern::scale(n, 0.37, s2.data());
        CHECK(s1 == s2);

        kern::scalar::relu(n, x.data(), outs.data());
        kern::relu(n, x.data(), outv.data());
        CHECK(outs == outv);
        kern::reset_backend();
    }
}

TEST_CASE("forcing the scalar backend changes the active backend and back") {
    auto initial = kern::active_backend();
    kern::force_backend(kern::Backend::Scalar);
    CHECK(kern::active_backend() == kern::Backend::Scalar);
    kern::reset_backend();
    CHECK(kern::active_backend() == initial);
    CHECK(kern::backend_name(kern::Backend::Scalar) == "scalar");
    CHECK(kern::backend_name(kern::Backend::Avx2) == "avx2");
}

TEST_CASE("matmul variants match a naive triple loop") {
    std::mt19937_64 rng(11);
    for (auto [m, n, p] : {std::array<std::size_t, 3>{1, 1, 1},
                           std::array<std::size_t, 3>{2, 3, 4},
                           std::array<std::size_t, 3>{5, 7, 3},
                           std::array<std::size_t, 3>{8, 8, 8},
                           std::array<std::size_t, 3>{3, 16, 5}}) {
        auto a = randvec(m * n, rng);
        auto b = randvec(n * p, rng);
        std::vector<double> want(m * p, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t j = 0; j < p; ++j) want[i * p + j] += a[i * n + k] * b[k * p + j];

        std::vector<double> c(m * p, 99.0);
        kern::matmul(m, n, p, a.data(), b.data(), c.data());
        for (std::size_t i = 0; i < m * p; ++i) CHECK(c[i] == doctest::Approx(want[i]));

        // accumulate=true adds on top
        kern::matmul(m, n, p, a.data(), b.data(), c.data(), true);
        for (std::size_t i = 0; i < m * p; ++i) CHECK(c[i] == doctest::Approx(2.0 * want[i]));

        // A^T * B with A stored [n x m]
        std::vector<double> at(n * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < n; ++k) at[k * m + i] = a[i * n + k];
        std::vector<double> c2(m * p, 0.0);
        kern::matmul_at_b(m, n, p, at.data(), b.data(), c2.data());
        for (std::size_t i = 0; i < m * p; ++i) CHECK(c2[i] == doctest::Approx(want[i]));

        // A * B^T with B stored [p x n]
        std::vector<double> bt(p * n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < p; ++j) bt[j * n + k] = b[k * p + j];
        std::vector<double> c3(m * p, 0.0);
        kern::matmul_a_bt(m, n, p, a.data(), bt.data(), c3.data());
        for (std::size_t i = 0; i < m * p; ++i) CHECK(c3[i] == doctest::Approx(want[i]));
    }
}

TEST_CASE("matmul is backend invariant") {
    if (!avx2_available()) return;
    std::mt19937_64 rng(13);
    auto a = randvec(6 * 9, rng);
    auto b = randvec(9 * 5, rng);
    std::vector<double> cs(6 * 5, 0.0), cv(6 * 5, 0.0);
    kern::force_backend(kern::Backend::Scalar);
    kern::matmul(6, 9, 5, a.data(), b.data(), cs.data());
    kern::force_backend(kern::Backend::Avx2);
    kern::matmul(6, 9, 5, a.data(), b.data(), cv.data());
    kern::reset_backend();
    for (std::size_t i = 0; i < cs.size(); ++i)
        CHECK(cs[i] == doctest::Approx(cv[i]).epsilon(1e-12));
}
