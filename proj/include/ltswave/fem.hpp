#ifndef LTSWAVE_FEM_HPP
#define LTSWAVE_FEM_HPP

#include "ltswave/dofmap.hpp"
#include "ltswave/mesh.hpp"
#include "ltswave/sparse.hpp"

#include <functional>
#include <vector>

namespace ltswave {

/// Scalar function of a spatial point (wave speed, initial data, loads).
using SpatialFn = std::function<double(Point)>;

/// Consistent mass operator M, entries ∫ b_z b_z'.  Symmetric positive
/// definite; the sum of all entries equals |Ω|.
SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofmap);

/// Row-sum lumped mass (diagonal).  Only meaningful for degree 1; degree 2
/// row sums vanish at vertex nodes, so the request is rejected.
DiagonalOperator assemble_lumped_mass(const Mesh& mesh, const DofMap& dofmap);

/// Stiffness operator with entries ∫ c(x)² ∇b_z·∇b_z'.  The wave speed
/// must be positive at every quadrature point.
SparseOperator assemble_stiffness(const Mesh& mesh, const DofMap& dofmap,
                                  const SpatialFn& wave_speed);

/// Load vector with entries ∫ g b_z (high-order quadrature).
NodalField assemble_load(const Mesh& mesh, const DofMap& dofmap, const SpatialFn& g);

/// Diagonal nodal weights d_z = Σ_{τ ∋ z} |τ| for nodes in `node_set`,
/// zero elsewhere.  With the full node set, ⟨D u, v⟩ reproduces the
/// mesh-dependent inner product Σ_τ |τ| Σ_{z∈τ} u_z v_z exactly.
DiagonalOperator assemble_diag_weights(const Mesh& mesh, const DofMap& dofmap,
                                       const std::vector<unsigned char>& node_set);

/// Volume-share variant of the weights above: d_z = Σ_{τ ∋ z} |τ| / n_τ
/// with n_τ the number of nodes per element, masked by `node_set`.  The
/// full-set weights partition the domain volume, and for degree 1 they
/// coincide with the row-sum lumped mass, so M_lumped⁻¹ D is exactly the
/// 0/1 indicator of the node set — the scaling the sub-stepped operator
/// family needs to act as a weighted projection onto the fine region.
DiagonalOperator assemble_restriction_weights(const Mesh& mesh, const DofMap& dofmap,
                                              const std::vector<unsigned char>& node_set);

/// Solver for M x = b: preconditioned conjugate gradients with Jacobi
/// preconditioner (relative residual 1e−12) for a consistent mass, or an
/// exact diagonal solve for a lumped mass.
class MassSolver {
  public:
    MassSolver() = default;
    explicit MassSolver(SparseOperator mass, double rel_tol = 1e-12,
                        int max_iter = 10000);
    explicit MassSolver(DiagonalOperator lumped_mass);

    void solve(const NodalField& b, NodalField& x) const;
    NodalField solve(const NodalField& b) const;

    bool lumped() const { return lumped_; }
    std::size_t rows() const { return lumped_ ? diag_.rows() : mass_.rows(); }

  private:
    SparseOperator mass_;
    std::vector<double> inv_diag_; // Jacobi preconditioner
    DiagonalOperator diag_;
    double rel_tol_ = 1e-12;
    int max_iter_ = 10000;
    bool lumped_ = false;
};

/// Zero the entries of constrained nodes.
void zero_dirichlet(NodalField& u, const std::vector<unsigned char>& mask);

/// L2 projection of g onto the FE space: solve M x = load(g).  The load is
/// zeroed at Dirichlet nodes; pass a solver whose mass operator carries the
/// matching elimination (or none for pure-Neumann problems).
NodalField project_l2(const Mesh& mesh, const DofMap& dofmap,
                      const MassSolver& solver, const SpatialFn& g);

struct Norms {
    double l2 = 0.0;       // √(uᵀ M u)
    double h1 = 0.0;       // √(uᵀ M u + uᵀ A₁ u), unit-coefficient stiffness
    double mesh_dep = 0.0; // √⟨D u, u⟩
};

Norms compute_norms(const NodalField& u, const SparseOperator& mass,
                    const SparseOperator& stiffness_unit,
                    const DiagonalOperator& weights);

/// L2 distance between the FE function with coefficients u and an analytic
/// function, via element-wise high-order quadrature.
double l2_error_vs_exact(const Mesh& mesh, const DofMap& dofmap,
                         const NodalField& u, const SpatialFn& exact);

/// Gradient of a scalar function, returned as a point (y component unused
/// in 1D).
using SpatialGradFn = std::function<Point(Point)>;

/// Full H1 distance √(‖u_h − u‖²_L2 + ‖∇u_h − ∇u‖²_L2) between the FE
/// function with coefficients u and an analytic function with gradient
/// `exact_grad`, via element-wise high-order quadrature.
double h1_error_vs_exact(const Mesh& mesh, const DofMap& dofmap,
                         const NodalField& u, const SpatialFn& exact,
                         const SpatialGradFn& exact_grad);

} // namespace ltswave

#endif
