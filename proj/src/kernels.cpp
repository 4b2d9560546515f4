#include "ltswave/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ltswave::kernels {

namespace {
int g_threads = 1;
}

int set_threads(int n) {
    if (n < 1)
        n = 1;
#ifdef _OPENMP
    g_threads = n;
    omp_set_num_threads(n);
#else
    g_threads = 1;
#endif
    return g_threads;
}

int threads() { return g_threads; }

void spmv_serial(std::size_t n_rows, const std::size_t* row_ptr,
                 const std::size_t* col_idx, const double* vals,
                 const double* x, double* y) {
    for (std::size_t i = 0; i < n_rows; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            acc += vals[k] * x[col_idx[k]];
        y[i] = acc;
    }
}

void spmv_parallel(std::size_t n_rows, const std::size_t* row_ptr,
                   const std::size_t* col_idx, const double* vals,
                   const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_rows; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            acc += vals[k] * x[col_idx[k]];
        y[i] = acc;
    }
}

void spmv(std::size_t n_rows, const std::size_t* row_ptr,
          const std::size_t* col_idx, const double* vals, const double* x,
          double* y) {
    if (g_threads > 1)
        spmv_parallel(n_rows, row_ptr, col_idx, vals, x, y);
    else
        spmv_serial(n_rows, row_ptr, col_idx, vals, x, y);
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = x.size();
    if (g_threads > 1) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i)
            y[i] += a * x[i];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            y[i] += a * x[i];
    }
}

void xpay(const std::vector<double>& x, double a, const std::vector<double>& y,
          std::vector<double>& z) {
    const std::size_t n = x.size();
    if (g_threads > 1) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i)
            z[i] = x[i] + a * y[i];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            z[i] = x[i] + a * y[i];
    }
}

void leapfrog_update(const std::vector<double>& u, const std::vector<double>& up,
                     double dt2, const std::vector<double>& w,
                     std::vector<double>& out) {
    const std::size_t n = u.size();
    if (g_threads > 1) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 2.0 * u[i] - up[i] + dt2 * w[i];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = 2.0 * u[i] - up[i] + dt2 * w[i];
    }
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i] * y[i];
    return acc;
}

double norm2_sq(const std::vector<double>& x) { return dot(x, x); }

bool all_finite(const std::vector<double>& x) {
    for (double v : x)
        if (!std::isfinite(v))
            return false;
    return true;
}

} // namespace ltswave::kernels
