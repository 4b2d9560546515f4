#include "ltswave/sparse.hpp"

#include "ltswave/errors.hpp"
#include "ltswave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltswave {

SparseOperator SparseOperator::from_triplets(std::size_t n,
                                             std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets)
        if (t.row >= n || t.col >= n)
            throw AssemblyFailure("sparse assembly: triplet index out of range");

    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) {
                         return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });

    SparseOperator A;
    A.n_ = n;
    A.row_ptr_.assign(n + 1, 0);
    A.col_idx_.reserve(triplets.size());
    A.vals_.reserve(triplets.size());

    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k < triplets.size() && triplets[k].row == i) {
            const std::size_t c = triplets[k].col;
            double v = triplets[k].value;
            ++k;
            while (k < triplets.size() && triplets[k].row == i && triplets[k].col == c) {
                v += triplets[k].value;
                ++k;
            }
            A.col_idx_.push_back(c);
            A.vals_.push_back(v);
        }
        A.row_ptr_[i + 1] = A.col_idx_.size();
    }
    return A;
}

void SparseOperator::apply(const NodalField& x, NodalField& y) const {
    if (x.size() != n_)
        throw InvalidArgument("sparse apply: dimension mismatch");
    y.resize(n_);
    kernels::spmv(n_, row_ptr_.data(), col_idx_.data(), vals_.data(), x.data(),
                  y.data());
}

void SparseOperator::apply_add(double a, const NodalField& x, NodalField& y) const {
    NodalField tmp;
    apply(x, tmp);
    kernels::axpy(a, tmp, y);
}

std::vector<double> SparseOperator::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            if (col_idx_[k] == i)
                d[i] = vals_[k];
    return d;
}

bool SparseOperator::is_symmetric(double rel_tol) const {
    double scale = 0.0;
    for (double v : vals_)
        scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t j = col_idx_[k];
            // locate (j, i)
            double vji = 0.0;
            bool found = false;
            for (std::size_t l = row_ptr_[j]; l < row_ptr_[j + 1]; ++l) {
                if (col_idx_[l] == i) {
                    vji = vals_[l];
                    found = true;
                    break;
                }
            }
            const double diff = std::abs(vals_[k] - vji);
            if (!found && std::abs(vals_[k]) > rel_tol * scale)
                return false;
            if (diff > rel_tol * scale)
                return false;
        }
    }
    return true;
}

double SparseOperator::sum_entries() const {
    double s = 0.0;
    for (double v : vals_)
        s += v;
    return s;
}

void SparseOperator::eliminate(const std::vector<unsigned char>& mask) {
    if (mask.size() != n_)
        throw InvalidArgument("eliminate: mask size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t j = col_idx_[k];
            if (mask[i] || mask[j])
                vals_[k] = (i == j) ? 1.0 : 0.0;
        }
    }
}

void SparseOperator::SubBlock::apply(const double* x, double* y) const {
    for (std::size_t i = 0; i < n_rows; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            acc += vals[k] * x[col_idx[k]];
        y[i] = acc;
    }
}

SparseOperator::SubBlock
SparseOperator::extract(const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols_of,
                        std::size_t n_cols) const {
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    SubBlock B;
    B.n_rows = rows.size();
    B.n_cols = n_cols;
    B.row_ptr.assign(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t lc = cols_of[col_idx_[k]];
            if (lc != npos) {
                B.col_idx.push_back(lc);
                B.vals.push_back(vals_[k]);
            }
        }
        B.row_ptr[r + 1] = B.col_idx.size();
    }
    return B;
}

void DiagonalOperator::apply(const NodalField& x, NodalField& y) const {
    if (x.size() != d_.size())
        throw InvalidArgument("diagonal apply: dimension mismatch");
    y.resize(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i)
        y[i] = d_[i] * x[i];
}

void DiagonalOperator::solve(const NodalField& x, NodalField& y) const {
    if (x.size() != d_.size())
        throw InvalidArgument("diagonal solve: dimension mismatch");
    y.resize(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i) {
        if (d_[i] <= 0.0)
            throw NumericFailure("diagonal solve: non-positive diagonal entry");
        y[i] = x[i] / d_[i];
    }
}

} // namespace ltswave
