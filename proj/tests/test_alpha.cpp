#include "ltswave/alpha.hpp"
#include "ltswave/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ltswave;

TEST_SUITE_BEGIN("alpha");

// Frozen reference values, worked out by hand from the defining recursion.
// a[j-1] holds the j-th stabilization coefficient of the p-sub-step scheme.
TEST_CASE("spot values p = 2, 3, 4, 5") {
    for (auto make : {alpha_recursive, alpha_closed_form}) {
        AlphaTable t2 = make(2);
        REQUIRE(t2.coeffs.size() == 1);
        CHECK(t2.coeffs[0] == doctest::Approx(0.5).epsilon(1e-14));

        AlphaTable t3 = make(3);
        REQUIRE(t3.coeffs.size() == 2);
        CHECK(t3.coeffs[0] == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(t3.coeffs[1] == doctest::Approx(-0.5).epsilon(1e-14));

        AlphaTable t4 = make(4);
        REQUIRE(t4.coeffs.size() == 3);
        CHECK(t4.coeffs[0] == doctest::Approx(10.0).epsilon(1e-14));
        CHECK(t4.coeffs[1] == doctest::Approx(-4.0).epsilon(1e-14));
        CHECK(t4.coeffs[2] == doctest::Approx(0.5).epsilon(1e-14));

        AlphaTable t5 = make(5);
        REQUIRE(t5.coeffs.size() == 4);
        CHECK(t5.coeffs[0] == doctest::Approx(25.0).epsilon(1e-14));
        CHECK(t5.coeffs[1] == doctest::Approx(-17.5).epsilon(1e-14));
        CHECK(t5.coeffs[2] == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(t5.coeffs[3] == doctest::Approx(-0.5).epsilon(1e-14));
    }
}

TEST_CASE("degenerate orders") {
    CHECK(alpha_recursive(1).coeffs.empty());
    CHECK(alpha_closed_form(1).coeffs.empty());
    CHECK_THROWS_AS(alpha_recursive(0), InvalidArgument);
    CHECK_THROWS_AS(alpha_closed_form(0), InvalidArgument);
    CHECK_THROWS_AS(alpha_recursive(-3), InvalidArgument);
}

TEST_CASE("recursion and closed form agree for p <= 16") {
    for (int p = 2; p <= 16; ++p) {
        AlphaTable rec = alpha_recursive(p);
        AlphaTable cls = alpha_closed_form(p);
        REQUIRE(rec.coeffs.size() == static_cast<std::size_t>(p - 1));
        REQUIRE(cls.coeffs.size() == static_cast<std::size_t>(p - 1));
        for (int j = 0; j < p - 1; ++j) {
            const double denom = std::max(std::abs(cls.coeffs[j]), 1e-300);
            CHECK(std::abs(rec.coeffs[j] - cls.coeffs[j]) / denom <= 1e-10);
        }
    }
}

TEST_CASE("structural invariants") {
    for (int p = 2; p <= 16; ++p) {
        AlphaTable t = alpha_closed_form(p);
        // leading coefficient p^2 (p^2 - 1) / 24
        const double lead = double(p) * p * (double(p) * p - 1.0) / 24.0;
        CHECK(t.coeffs[0] == doctest::Approx(lead).epsilon(1e-13));
        // trailing coefficient has magnitude exactly 1/2, sign (-1)^p
        const double tail = (p % 2 == 0) ? 0.5 : -0.5;
        CHECK(t.coeffs[p - 2] == doctest::Approx(tail).epsilon(1e-13));
        // signs alternate starting positive
        for (int j = 0; j < p - 1; ++j)
            CHECK(t.coeffs[j] * ((j % 2 == 0) ? 1.0 : -1.0) > 0.0);
    }
}

// The two stabilization-polynomial sums have closed forms in terms of the
// degree-p Chebyshev polynomial of the first kind:
//   sum_j a_j x^j     = p^2/2 + (T_p(1 - x/2) - 1)/x
//   sum_j a_j x^{j-1} = (p^2 x + 2 T_p(1 - x/2) - 2)/(2 x^2)
TEST_CASE("chebyshev closed forms on [1e-3, 4]") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> ux(1e-3, 4.0);
    for (int p = 2; p <= 12; ++p) {
        AlphaTable t = alpha_closed_form(p);
        for (int s = 0; s < 50; ++s) {
            const double x = ux(rng);
            const StabPolyValues v = stab_poly_eval(t, x);
            const double tp = chebyshev_t(p, 1.0 - x / 2.0);
            const double ref_xj = 0.5 * p * p + (tp - 1.0) / x;
            const double ref_xjm1 =
                (double(p) * p * x + 2.0 * tp - 2.0) / (2.0 * x * x);
            CHECK(std::abs(v.sum_xj - ref_xj) <=
                  1e-9 * std::max(1.0, std::abs(ref_xj)));
            CHECK(std::abs(v.sum_xj_minus1 - ref_xjm1) <=
                  1e-9 * std::max(1.0, std::abs(ref_xjm1)));
        }
    }
}

// Chebyshev spot checks from the identity members.
TEST_CASE("identity spot values") {
    // p=2, x=1: single term a_1 x = 1/2
    StabPolyValues v2 = stab_poly_eval(alpha_closed_form(2), 1.0);
    CHECK(v2.sum_xj == doctest::Approx(0.5).epsilon(1e-14));
    // p=3, x=4: 3*4 - (1/2)*16 = 4; and sum a_j x^{j-1} = 3 - 2 = 1
    StabPolyValues v3 = stab_poly_eval(alpha_closed_form(3), 4.0);
    CHECK(v3.sum_xj == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(v3.sum_xj_minus1 == doctest::Approx(1.0).epsilon(1e-12));
}

// Scaled-sum bounds that drive the stability analysis:
//   |(2/p^2) sum_j a_j (k/p^2)^j|      <= k/12          for k in [0, 4p^2]
//   |(2/p^2) sum_j a_j (k/p^2)^{j-1}|  <= (p^2 - 1)/12
TEST_CASE("stability bounds over the admissible range") {
    std::mt19937 rng(777);
    for (int p = 2; p <= 12; ++p) {
        AlphaTable t = alpha_closed_form(p);
        std::uniform_real_distribution<double> uk(0.0, 4.0 * p * p);
        const double scale = 2.0 / (double(p) * p);
        for (int s = 0; s < 200; ++s) {
            const double kappa = uk(rng);
            const StabPolyValues v = stab_poly_eval(t, kappa / (double(p) * p));
            CHECK(std::abs(scale * v.sum_xj) <= kappa / 12.0 + 1e-9 * (1.0 + kappa));
            CHECK(std::abs(scale * v.sum_xj_minus1) <=
                  (double(p) * p - 1.0) / 12.0 + 1e-9 * p * p);
        }
    }
}

TEST_CASE("chebyshev evaluation basics") {
    CHECK(chebyshev_t(0, 0.3) == doctest::Approx(1.0));
    CHECK(chebyshev_t(1, 0.3) == doctest::Approx(0.3));
    CHECK(chebyshev_t(2, 0.3) == doctest::Approx(2 * 0.3 * 0.3 - 1));
    // T_p(cos a) = cos(p a)
    for (int p = 1; p <= 10; ++p) {
        const double a = 0.7;
        CHECK(chebyshev_t(p, std::cos(a)) ==
              doctest::Approx(std::cos(p * a)).epsilon(1e-12));
    }
}

TEST_SUITE_END();
