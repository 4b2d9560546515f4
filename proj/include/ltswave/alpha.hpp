#ifndef LTSWAVE_ALPHA_HPP
#define LTSWAVE_ALPHA_HPP

#include <vector>

namespace ltswave {

/// Stabilization coefficients of the local time-stepping leap-frog scheme
/// with p sub-steps.  coeffs[j-1] holds the coefficient of the j-th power of
/// the scaled fine-grid operator in the perturbed stiffness form, for
/// j = 1 .. p-1 (empty for p = 1, where the scheme reduces to plain
/// leap-frog).
struct AlphaTable {
    int p = 1;
    std::vector<double> coeffs;
};

/// Build the table from the three-term recursion in p (production cross-check
/// path).  Throws InvalidArgument for p < 1.
AlphaTable alpha_recursive(int p);

/// Build the table from the closed-form product formula
///   a_j = prod_{l=0}^{j} (l^2 - p^2) / (2j+2)!
/// evaluated as a running product (production path).
AlphaTable alpha_closed_form(int p);

/// Values of the two stabilization-polynomial sums at a point x:
///   sum_xj        = sum_{j=1}^{p-1} a_j x^j
///   sum_xj_minus1 = sum_{j=1}^{p-1} a_j x^{j-1}
struct StabPolyValues {
    double sum_xj = 0.0;
    double sum_xj_minus1 = 0.0;
};

/// Direct (Horner) evaluation of both sums.
StabPolyValues stab_poly_eval(const AlphaTable& table, double x);

/// Chebyshev polynomial of the first kind, three-term recurrence.
double chebyshev_t(int n, double y);

} // namespace ltswave

#endif
