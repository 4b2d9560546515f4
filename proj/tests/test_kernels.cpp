#include "doctest.h"

#include "ltswave/kernels.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace ltswave;

namespace {

struct Csr {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col_idx;
    std::vector<double> vals;
};

/// Random banded matrix with a deterministic seed.
Csr random_csr(std::size_t n, std::size_t band, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Csr a;
    a.n = n;
    a.row_ptr.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > band ? i - band : 0;
        const std::size_t hi = std::min(n - 1, i + band);
        for (std::size_t j = lo; j <= hi; ++j) {
            a.col_idx.push_back(j);
            a.vals.push_back(val(rng));
        }
        a.row_ptr.push_back(a.col_idx.size());
    }
    return a;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("spmv matches a hand-computed product") {
    // [[2, -1, 0], [-1, 2, -1], [0, -1, 2]] * [1, 2, 3] = [0, 0, 4]
    const std::vector<std::size_t> rp{0, 2, 5, 7};
    const std::vector<std::size_t> ci{0, 1, 0, 1, 2, 1, 2};
    const std::vector<double> v{2, -1, -1, 2, -1, -1, 2};
    const std::vector<double> x{1, 2, 3};
    std::vector<double> y(3);
    kernels::spmv(3, rp.data(), ci.data(), v.data(), x.data(), y.data());
    CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(y[2] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("serial and OpenMP spmv agree bitwise for every thread count") {
    const Csr a = random_csr(512, 7, 42u);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> x(a.n);
    for (double& xi : x)
        xi = val(rng);

    std::vector<double> y_ref(a.n);
    kernels::spmv_serial(a.n, a.row_ptr.data(), a.col_idx.data(), a.vals.data(),
                         x.data(), y_ref.data());

    for (int nt : {1, 2, 3, 4, 8}) {
        kernels::set_threads(nt);
        std::vector<double> y(a.n, 0.0);
        kernels::spmv(a.n, a.row_ptr.data(), a.col_idx.data(), a.vals.data(),
                      x.data(), y.data());
        for (std::size_t i = 0; i < a.n; ++i)
            CHECK(y[i] == y_ref[i]); // bitwise
        std::vector<double> yp(a.n, 0.0);
        kernels::spmv_parallel(a.n, a.row_ptr.data(), a.col_idx.data(),
                               a.vals.data(), x.data(), yp.data());
        for (std::size_t i = 0; i < a.n; ++i)
            CHECK(yp[i] == y_ref[i]); // bitwise
    }
    kernels::set_threads(1);
}

TEST_CASE("vector kernels are thread-count independent") {
    std::mt19937 rng(99u);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    const std::size_t n = 1000;
    std::vector<double> u(n), up(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = val(rng);
        up[i] = val(rng);
        w[i] = val(rng);
    }

    kernels::set_threads(1);
    std::vector<double> y1 = up, z1(n), lf1(n);
    kernels::axpy(0.37, u, y1);
    kernels::xpay(u, -1.25, w, z1);
    kernels::leapfrog_update(u, up, 1e-4, w, lf1);
    const double d1 = kernels::dot(u, w);
    const double s1 = kernels::norm2_sq(u);

    kernels::set_threads(4);
    std::vector<double> y4 = up, z4(n), lf4(n);
    kernels::axpy(0.37, u, y4);
    kernels::xpay(u, -1.25, w, z4);
    kernels::leapfrog_update(u, up, 1e-4, w, lf4);
    CHECK(kernels::dot(u, w) == d1);
    CHECK(kernels::norm2_sq(u) == s1);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(y4[i] == y1[i]);
        CHECK(z4[i] == z1[i]);
        CHECK(lf4[i] == lf1[i]);
    }
    kernels::set_threads(1);
}

TEST_CASE("vector kernel arithmetic") {
    std::vector<double> y{1.0, 2.0};
    kernels::axpy(2.0, {10.0, 20.0}, y);
    CHECK(y[0] == 21.0);
    CHECK(y[1] == 42.0);

    std::vector<double> z(2);
    kernels::xpay({1.0, 1.0}, -0.5, {4.0, 8.0}, z);
    CHECK(z[0] == -1.0);
    CHECK(z[1] == -3.0);

    std::vector<double> lf(2);
    kernels::leapfrog_update({3.0, 5.0}, {1.0, 2.0}, 0.25, {4.0, -8.0}, lf);
    CHECK(lf[0] == 6.0); // 2*3 - 1 + 0.25*4
    CHECK(lf[1] == 6.0); // 2*5 - 2 + 0.25*(-8)

    CHECK(kernels::dot({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}) == 32.0);
    CHECK(kernels::norm2_sq({3.0, 4.0}) == 25.0);
}

TEST_CASE("all_finite flags NaN and infinity") {
    CHECK(kernels::all_finite({0.0, -1.5, 1e300}));
    CHECK_FALSE(kernels::all_finite({0.0, std::numeric_limits<double>::quiet_NaN()}));
    CHECK_FALSE(kernels::all_finite({std::numeric_limits<double>::infinity()}));
}

TEST_CASE("thread configuration") {
    CHECK(kernels::set_threads(1) == 1);
    CHECK(kernels::threads() == 1);
    const int got = kernels::set_threads(2);
    CHECK(got >= 1); // 2 with OpenMP, clamped to 1 without
    CHECK(kernels::threads() == got);
    kernels::set_threads(1);
    CHECK(kernels::threads() == 1);
}

} // TEST_SUITE
