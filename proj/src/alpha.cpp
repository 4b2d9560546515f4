#include "ltswave/alpha.hpp"

#include "ltswave/errors.hpp"

namespace ltswave {

AlphaTable alpha_recursive(int p) {
    if (p < 1)
        throw InvalidArgument("alpha_recursive: p must be >= 1");
    AlphaTable t;
    t.p = p;
    if (p == 1)
        return t;

    // prev = table for m, cur = table for m+1; seeds m = 2 and m = 3.
    std::vector<double> prev = {0.5};        // m = 2
    if (p == 2) {
        t.coeffs = prev;
        return t;
    }
    std::vector<double> cur = {3.0, -0.5};   // m = 3
    for (int m = 3; m < p; ++m) {
        std::vector<double> next(m, 0.0);    // coefficients 1 .. m of order m+1
        next[0] = 0.5 * m * m + 2.0 * cur[0] - prev[0];
        for (int j = 2; j <= m - 2; ++j)
            next[j - 1] = 2.0 * cur[j - 1] - prev[j - 1] - cur[j - 2];
        if (m >= 3)
            next[m - 2] = 2.0 * cur[m - 2] - cur[m - 3];
        next[m - 1] = -cur[m - 2];
        prev = std::move(cur);
        cur = std::move(next);
    }
    t.coeffs = cur;
    return t;
}

AlphaTable alpha_closed_form(int p) {
    if (p < 1)
        throw InvalidArgument("alpha_closed_form: p must be >= 1");
    AlphaTable t;
    t.p = p;
    if (p == 1)
        return t;
    t.coeffs.resize(p - 1);
    const double p2 = double(p) * p;
    // a_1 = (0 - p^2)(1 - p^2) / 4! ; then
    // a_{j+1} = a_j * ((j+1)^2 - p^2) / ((2j+3)(2j+4))
    double a = p2 * (p2 - 1.0) / 24.0;
    t.coeffs[0] = a;
    for (int j = 1; j < p - 1; ++j) {
        a *= (double(j + 1) * (j + 1) - p2) / (double(2 * j + 3) * (2 * j + 4));
        t.coeffs[j] = a;
    }
    return t;
}

StabPolyValues stab_poly_eval(const AlphaTable& table, double x) {
    StabPolyValues v;
    const std::vector<double>& a = table.coeffs;
    if (a.empty())
        return v;
    // Horner on a_1 + a_2 x + ... + a_{p-1} x^{p-2} gives the x^{j-1} sum;
    // the x^j sum is x times it.
    double s = a.back();
    for (std::size_t j = a.size() - 1; j-- > 0;)
        s = a[j] + x * s;
    v.sum_xj_minus1 = s;
    v.sum_xj = x * s;
    return v;
}

double chebyshev_t(int n, double y) {
    if (n <= 0)
        return 1.0;
    double tm = 1.0, tc = y;
    for (int k = 2; k <= n; ++k) {
        const double tn = 2.0 * y * tc - tm;
        tm = tc;
        tc = tn;
    }
    return tc;
}

} // namespace ltswave
