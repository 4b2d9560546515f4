#ifndef LTSWAVE_LTS_HPP
#define LTSWAVE_LTS_HPP

#include "ltswave/alpha.hpp"
#include "ltswave/fem.hpp"
#include "ltswave/sparse.hpp"

#include <functional>
#include <vector>

namespace ltswave {

/// Time-stepping configuration: global step dt, sub-step ratio p (the fine
/// region advances with dtau = dt/p), and the CFL safety factor.
struct StepConfig {
    int p = 1;
    double dt = 0.0;
    double safety = 0.95;
    double dtau() const { return dt / double(p); }
};

/// Two-level leap-frog state: u_curr = u^(n), u_prev = u^(n-1), t = n*dt.
/// ref_norm (2-norm of the initial data) feeds the blow-up detector; zero
/// disables the relative-growth check.
struct SimState {
    std::size_t n = 0;
    double t = 0.0;
    NodalField u_curr;
    NodalField u_prev;
    double ref_norm = 0.0;
};

/// Discrete leap-frog energy at the half step n+1/2 (state holds u^(n+1)
/// in u_curr and u^(n) in u_prev).
struct EnergyRecord {
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

/// Fills f with the coefficients of the L2-represented forcing f_S(t).
/// An empty function means f == 0.  Sub-stepping evaluates the forcing at
/// times down to t - dt, so providers must accept arguments in [-dt, T].
using LoadProvider = std::function<void(double t, NodalField& f)>;

/// Immutable operator bundle for one simulation: stiffness A, fine-region
/// weights D_N, a mass solver, and the mass itself (consistent matrix or
/// lumped diagonal).  When the mass is lumped, a fine-patch structure is
/// precomputed so the sub-step recursion runs on the patch only.
struct LtsOperators {
    std::size_t n = 0;
    const SparseOperator* stiffness = nullptr;
    const DiagonalOperator* weights = nullptr; // D_N
    const MassSolver* solver = nullptr;
    const SparseOperator* mass = nullptr;          // consistent (or nullptr)
    const DiagonalOperator* lumped_mass = nullptr; // lumped (or nullptr)

    // Fast-path data (lumped mass only).  N = supported nodes of D_N;
    // G = N plus all stiffness-adjacent nodes; a_gn = A restricted to
    // rows G, columns N, in local indices.
    std::vector<std::size_t> fine_nodes;  // N, ascending global ids
    std::vector<std::size_t> patch_nodes; // G, ascending global ids
    std::vector<std::size_t> n_in_g;      // N-local -> G-local position
    std::vector<double> b_ratio;          // d_z / m_z per N-local node
    std::vector<double> inv_m_patch;      // 1 / m_z per G-local node
    SparseOperator::SubBlock a_gn;

    bool lumped() const { return lumped_mass != nullptr; }

    /// y = M x (consistent or lumped).
    void apply_mass(const NodalField& x, NodalField& y) const;
    /// y = M^{-1} A x (the operator A_S in coefficient form).
    void apply_op(const NodalField& x, NodalField& y) const;
    /// y = M^{-1} D_N x (the restriction R_N in coefficient form).
    void apply_restriction(const NodalField& x, NodalField& y) const;
};

/// Bundle the assembled operators; exactly one of consistent_mass /
/// lumped_mass must be non-null and must match the solver's mode.
LtsOperators build_lts_operators(const SparseOperator& stiffness,
                                 const DiagonalOperator& weights,
                                 const MassSolver& solver,
                                 const SparseOperator* consistent_mass,
                                 const DiagonalOperator* lumped_mass);

/// Reusable scratch buffers for the steppers (auto-sized on first use).
struct LtsWorkspace {
    std::vector<NodalField> full;               // n-sized buffers
    std::vector<std::vector<double>> patch;     // patch-sized buffers
};

/// Leap-frog initial step: u^(1) = u0 + dt v0 + (dt^2/2)(f_S(0) - M^{-1}A u0),
/// returning the state (u^(1), u^(0)) at n = 1.  Uses the unperturbed
/// operator; u0 and v0 are coefficient vectors of the projected data.
SimState initial_step(const LtsOperators& ops, const StepConfig& cfg,
                      const NodalField& u0, const NodalField& v0,
                      const LoadProvider& load, LtsWorkspace& ws);

/// One LTS-LF step of the sub-cycled algorithm:
///   1. w = M^{-1}((M - D_N) f^(n) - A(I - M^{-1}D_N) u^(n))
///   2. u~_1 = u~_0 + (dtau^2/2)(w + M^{-1}(D_N f^(n) - A M^{-1}D_N u~_0))
///   3. for m = 1..p-1:
///        u~_{m+1} = 2u~_m - u~_{m-1}
///                   + dtau^2(w + M^{-1}(D_N (f_m + f_{-m})/2 - A M^{-1}D_N u~_m))
///      with f_{+-m} = f_S(t_n +- m dtau)
///   4. u^(n+1) = -u^(n-1) + 2 u~_p
/// With a lumped mass the sub-step recursion is evaluated on the fine patch
/// only; away from it the recursion telescopes to the plain leap-frog
/// update (algebraically identical result).
void lts_lf_step(const LtsOperators& ops, const StepConfig& cfg, SimState& state,
                 const LoadProvider& load, LtsWorkspace& ws);

/// Applies the perturbed operator
///   A_{S,p} = A_S - (2/p^2) sum_{j=1}^{p-1} alpha_j^p dtau^(2j) A_S (R_N A_S)^j
/// matrix-free (Horner accumulation over j).
void apply_asp(const LtsOperators& ops, const StepConfig& cfg,
               const AlphaTable& alphas, const NodalField& u, NodalField& out,
               LtsWorkspace& ws);

/// One step of the equivalent perturbed leap-frog
///   u^(n+1) = 2u^(n) - u^(n-1) + dt^2 (f^(n) - A_{S,p} u^(n)).
/// Exists as the verification oracle for lts_lf_step.
void lts_lf_step_via_asp(const LtsOperators& ops, const StepConfig& cfg,
                         const AlphaTable& alphas, SimState& state,
                         const LoadProvider& load, LtsWorkspace& ws);

/// One step of the textbook leap-frog at step size dt (reference scheme for
/// reduction tests and runtime comparisons).
void leapfrog_reference_step(const LtsOperators& ops, double dt, SimState& state,
                             const LoadProvider& load, LtsWorkspace& ws);

struct LambdaEstimate {
    double value = 0.0;
    bool converged = false;
    double residual = 0.0; // last relative Rayleigh increment
};

using OperatorFn = std::function<void(const NodalField&, NodalField&)>;

/// Power iteration for the dominant eigenvalue of a self-adjoint (in the
/// M-inner product) operator; mass_apply supplies y = M x.
LambdaEstimate estimate_lambda_max(const OperatorFn& op, const OperatorFn& mass_apply,
                                   std::size_t n, int max_iters = 5000,
                                   double tol = 1e-8);

struct CflReport {
    bool ok = false;
    double dt_max = 0.0;
    double lambda_max_asp = 0.0;
};

/// Spectral CFL check: ok iff dt^2 lambda_max(A_{S,p}(dt)) < 4 safety^2
/// (vacuously ok for dt <= 0).  dt_max = 2 safety / sqrt(lambda_max) with
/// the A_{S,p} spectrum re-evaluated once at the candidate step, starting
/// from the sub-step bound p * 2/sqrt(lambda_max(A_S)).
CflReport verify_cfl(const LtsOperators& ops, const StepConfig& cfg,
                     const AlphaTable& alphas);

/// Discrete energy at n+1/2; state holds u^(n+1) in u_curr, u^(n) in u_prev.
EnergyRecord discrete_energy(const LtsOperators& ops, const StepConfig& cfg,
                             const AlphaTable& alphas, const SimState& state,
                             LtsWorkspace& ws);

/// sqrt(u^T M u)
double m_norm(const LtsOperators& ops, const NodalField& u);

} // namespace ltswave

#endif
