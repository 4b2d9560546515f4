#ifndef LTSWAVE_SPARSE_HPP
#define LTSWAVE_SPARSE_HPP

#include <cstddef>
#include <vector>

namespace ltswave {

/// Coefficient vector of a finite-element function (one entry per node).
using NodalField = std::vector<double>;

/// One matrix entry used during assembly; duplicates are summed.
struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

/// Square sparse operator in compressed-sparse-row storage.
///
/// Built once from assembly triplets, then applied many times.  Assembly
/// sums duplicate entries deterministically (stable sort by row, then
/// column; accumulation in index order), so the stored values do not depend
/// on element traversal order or the thread count used to compute the
/// element matrices.
class SparseOperator {
  public:
    SparseOperator() = default;

    /// Build an n x n operator from triplets. Duplicates are summed; entries
    /// with |value| == 0 after summation are kept (structural nonzeros).
    static SparseOperator from_triplets(std::size_t n, std::vector<Triplet> triplets);

    std::size_t rows() const { return n_; }
    std::size_t nnz() const { return vals_.size(); }

    /// y = A x
    void apply(const NodalField& x, NodalField& y) const;

    /// y += a * (A x)
    void apply_add(double a, const NodalField& x, NodalField& y) const;

    /// Copy of the diagonal (zeros where absent).
    std::vector<double> diagonal() const;

    /// Entry-wise symmetry check with relative tolerance.
    bool is_symmetric(double rel_tol = 1e-14) const;

    /// Sum of all entries (used for the mass partition-of-unity check).
    double sum_entries() const;

    /// Symmetric elimination of constrained rows/columns: for every i with
    /// mask[i] != 0, zero row i and column i and set the diagonal to 1.
    void eliminate(const std::vector<unsigned char>& mask);

    /// Extract the rectangular sub-block A(rows, cols) as a CSR matrix with
    /// local (renumbered) indices. `cols_of` maps a global column index to
    /// its local index, or npos if the column is not selected.
    struct SubBlock {
        std::vector<std::size_t> row_ptr;
        std::vector<std::size_t> col_idx; // local column indices
        std::vector<double> vals;
        std::size_t n_rows = 0;
        std::size_t n_cols = 0;
        void apply(const double* x, double* y) const; // y = B x (dense local vectors)
    };
    SubBlock extract(const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols_of,
                     std::size_t n_cols) const;

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return vals_; }
    std::vector<double>& values() { return vals_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> vals_;
};

/// Diagonal operator (nodal weights, lumped mass, ...). Zero entries are
/// allowed and mark nodes outside the operator's support.
class DiagonalOperator {
  public:
    DiagonalOperator() = default;
    explicit DiagonalOperator(std::vector<double> d) : d_(std::move(d)) {}

    std::size_t rows() const { return d_.size(); }
    const std::vector<double>& diag() const { return d_; }
    std::vector<double>& diag() { return d_; }

    /// y = D x
    void apply(const NodalField& x, NodalField& y) const;

    /// y = D^{-1} x. Requires a strictly positive diagonal.
    void solve(const NodalField& x, NodalField& y) const;

  private:
    std::vector<double> d_;
};

} // namespace ltswave

#endif
