#ifndef LTSWAVE_KERNELS_HPP
#define LTSWAVE_KERNELS_HPP

#include <cstddef>
#include <vector>

/// Low-level array kernels used by the sparse operators and time steppers.
///
/// Every kernel has a serial reference implementation and an OpenMP variant.
/// The OpenMP variants parallelize over rows/entries only, so for a fixed
/// input they produce bitwise-identical results for any thread count; the
/// serial path is what runs when the configured thread count is 1 (the
/// default).  Reductions (dot products, norms) are always evaluated serially
/// so that results never depend on the thread count.
namespace ltswave::kernels {

/// Set the number of OpenMP threads used by the parallel kernel variants.
/// A count of 1 (or a build without OpenMP) selects the serial reference
/// implementations.  Returns the effective thread count.
int set_threads(int n);

/// Currently configured thread count (1 when OpenMP is unavailable).
int threads();

/// y = A*x for a CSR matrix given by (row_ptr, col_idx, vals).
void spmv(std::size_t n_rows, const std::size_t* row_ptr,
          const std::size_t* col_idx, const double* vals, const double* x,
          double* y);

/// Serial reference version of spmv (used by tests and the kernel benchmark).
void spmv_serial(std::size_t n_rows, const std::size_t* row_ptr,
                 const std::size_t* col_idx, const double* vals,
                 const double* x, double* y);

/// OpenMP version of spmv regardless of the configured thread count.
void spmv_parallel(std::size_t n_rows, const std::size_t* row_ptr,
                   const std::size_t* col_idx, const double* vals,
                   const double* x, double* y);

/// y[i] += a * x[i]
void axpy(double a, const std::vector<double>& x, std::vector<double>& y);

/// z[i] = x[i] + a * y[i]
void xpay(const std::vector<double>& x, double a, const std::vector<double>& y,
          std::vector<double>& z);

/// out[i] = 2*u[i] - up[i] + dt2 * w[i]   (the leap-frog update)
void leapfrog_update(const std::vector<double>& u, const std::vector<double>& up,
                     double dt2, const std::vector<double>& w,
                     std::vector<double>& out);

/// Serial dot product (deterministic for every thread count).
double dot(const std::vector<double>& x, const std::vector<double>& y);

/// Serial squared 2-norm.
double norm2_sq(const std::vector<double>& x);

/// True if every entry is finite.
bool all_finite(const std::vector<double>& x);

} // namespace ltswave::kernels

#endif
