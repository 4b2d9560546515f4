#include "ltswave/lts.hpp"

#include "ltswave/errors.hpp"
#include "ltswave/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>

namespace ltswave {

namespace {

constexpr double kBlowUpFactor = 1e6;

// Workspace slot map.  apply_asp owns slots 0-2 so the steppers and the
// energy evaluation may call it with the same workspace they use themselves.
enum Slot : std::size_t {
    kAspAcc = 0,
    kAspT1 = 1,
    kAspT2 = 2,
    kLoad = 4,
    kRestrict = 5,
    kTmpA = 6,
    kTmpB = 7,
    kW = 8,
    kSubPrev = 9,
    kSubCurr = 10,
    kSubNext = 11,
    kLoadPlus = 12,
    kLoadMinus = 13,
    kNext = 14,
};

// The outer vectors are sized once to a fixed slot count so that references
// handed out earlier never dangle when another slot is fetched.
constexpr std::size_t kFullSlots = 16;
constexpr std::size_t kPatchSlots = 8;

NodalField& full_buf(LtsWorkspace& ws, std::size_t slot, std::size_t n) {
    if (ws.full.size() < kFullSlots) ws.full.resize(kFullSlots);
    if (ws.full[slot].size() != n) ws.full[slot].assign(n, 0.0);
    return ws.full[slot];
}

std::vector<double>& patch_buf(LtsWorkspace& ws, std::size_t slot, std::size_t n) {
    if (ws.patch.size() < kPatchSlots) ws.patch.resize(kPatchSlots);
    if (ws.patch[slot].size() != n) ws.patch[slot].assign(n, 0.0);
    return ws.patch[slot];
}

void check_ops(const LtsOperators& ops) {
    if (ops.n == 0 || ops.stiffness == nullptr || ops.weights == nullptr ||
        ops.solver == nullptr)
        throw InvalidArgument("lts: operator bundle is incomplete");
}

void check_step_args(const LtsOperators& ops, const StepConfig& cfg,
                     const SimState& state) {
    check_ops(ops);
    if (cfg.p < 1) throw InvalidArgument("lts: sub-step count p must be >= 1");
    if (!(cfg.dt > 0.0)) throw InvalidArgument("lts: step size dt must be positive");
    if (state.u_curr.size() != ops.n || state.u_prev.size() != ops.n)
        throw InvalidArgument("lts: state size does not match the operators");
}

/// Rotate (u_prev, u_curr, next) after blow-up screening; `next` is a
/// workspace buffer and ends up holding the discarded u_prev allocation.
void advance(double dt, SimState& state, NodalField& next) {
    if (!kernels::all_finite(next))
        throw BlowUpDetected("lts: non-finite values in the solution");
    if (state.ref_norm > 0.0) {
        double nrm = std::sqrt(kernels::norm2_sq(next));
        if (nrm > kBlowUpFactor * state.ref_norm)
            throw BlowUpDetected(
                "lts: solution norm exceeded 1e6 x the initial norm");
    }
    state.u_prev.swap(state.u_curr);
    state.u_curr.swap(next);
    ++state.n;
    state.t = double(state.n) * dt;
}

/// Verbatim sub-cycled step against the global operators (any mass type).
void step_global(const LtsOperators& ops, const StepConfig& cfg, SimState& state,
                 const LoadProvider& load, LtsWorkspace& ws) {
    const std::size_t n = ops.n;
    const int p = cfg.p;
    const double dtau = cfg.dtau();
    const double dtau2 = dtau * dtau;
    const NodalField& u = state.u_curr;
    const bool forced = static_cast<bool>(load);

    NodalField& fn = full_buf(ws, kLoad, n);
    NodalField& bu = full_buf(ws, kRestrict, n);
    NodalField& t1 = full_buf(ws, kTmpA, n);
    NodalField& t2 = full_buf(ws, kTmpB, n);
    NodalField& w = full_buf(ws, kW, n);
    NodalField& up = full_buf(ws, kSubPrev, n);
    NodalField& uc = full_buf(ws, kSubCurr, n);
    NodalField& un = full_buf(ws, kSubNext, n);
    NodalField& next = full_buf(ws, kNext, n);

    if (forced) load(state.t, fn);

    // Step 1: w = f - R f - M^{-1} A (u - R u), with R = M^{-1} D_N.
    ops.weights->apply(u, t1);
    ops.solver->solve(t1, bu); // bu = R u (kept for step 2)
    for (std::size_t i = 0; i < n; ++i) t1[i] = u[i] - bu[i];
    ops.stiffness->apply(t1, t2);
    ops.solver->solve(t2, w); // w = M^{-1} A (u - R u)
    if (forced) {
        ops.weights->apply(fn, t1);
        ops.solver->solve(t1, t2); // t2 = R f
        for (std::size_t i = 0; i < n; ++i) w[i] = fn[i] - t2[i] - w[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) w[i] = -w[i];
    }

    // Step 2: u~_1 = u + (dtau^2/2)(w + M^{-1}(D_N f - A R u)).
    up = u;
    ops.stiffness->apply(bu, t1); // t1 = A R u
    if (forced) {
        ops.weights->apply(fn, t2);
        for (std::size_t i = 0; i < n; ++i) t1[i] = t2[i] - t1[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) t1[i] = -t1[i];
    }
    ops.solver->solve(t1, t2);
    for (std::size_t i = 0; i < n; ++i)
        uc[i] = up[i] + 0.5 * dtau2 * (w[i] + t2[i]);

    // Step 3: the fine-region recursion on the full vectors.
    NodalField& fp = full_buf(ws, kLoadPlus, n);
    NodalField& fm = full_buf(ws, kLoadMinus, n);
    for (int m = 1; m < p; ++m) {
        ops.weights->apply(uc, t1);
        ops.solver->solve(t1, t2); // t2 = R u~_m
        ops.stiffness->apply(t2, t1); // t1 = A R u~_m
        if (forced) {
            load(state.t + m * dtau, fp);
            load(state.t - m * dtau, fm);
            for (std::size_t i = 0; i < n; ++i) fp[i] = 0.5 * (fp[i] + fm[i]);
            ops.weights->apply(fp, t2);
            for (std::size_t i = 0; i < n; ++i) t2[i] -= t1[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) t2[i] = -t1[i];
        }
        ops.solver->solve(t2, t1);
        for (std::size_t i = 0; i < n; ++i)
            un[i] = 2.0 * uc[i] - up[i] + dtau2 * (w[i] + t1[i]);
        up.swap(uc);
        uc.swap(un);
    }

    // Step 4: u^(n+1) = -u^(n-1) + 2 u~_p.
    for (std::size_t i = 0; i < n; ++i)
        next[i] = -state.u_prev[i] + 2.0 * uc[i];
    advance(cfg.dt, state, next);
}

/// Lumped-mass step: one global matvec for the leap-frog background update,
/// then the sub-step recursion evaluated on the fine patch only (away from
/// the patch the recursion telescopes to the plain leap-frog result).
void step_patch(const LtsOperators& ops, const StepConfig& cfg, SimState& state,
                const LoadProvider& load, LtsWorkspace& ws) {
    const std::size_t n = ops.n;
    const int p = cfg.p;
    const double dtau = cfg.dtau();
    const double dtau2 = dtau * dtau;
    const NodalField& u = state.u_curr;
    const bool forced = static_cast<bool>(load);
    const std::size_t nf = ops.fine_nodes.size();
    const std::size_t ng = ops.patch_nodes.size();

    NodalField& fn = full_buf(ws, kLoad, n);
    NodalField& t1 = full_buf(ws, kTmpA, n);
    NodalField& t2 = full_buf(ws, kTmpB, n);
    NodalField& w = full_buf(ws, kW, n);
    NodalField& next = full_buf(ws, kNext, n);

    if (forced) load(state.t, fn);

    // Step 1: w = f - B f - M^{-1} A (u - B u) with the diagonal B = M^{-1}D_N.
    t1 = u;
    for (std::size_t k = 0; k < nf; ++k)
        t1[ops.fine_nodes[k]] -= ops.b_ratio[k] * u[ops.fine_nodes[k]];
    ops.stiffness->apply(t1, t2);
    ops.lumped_mass->solve(t2, w);
    if (forced) {
        for (std::size_t i = 0; i < n; ++i) w[i] = fn[i] - w[i];
        for (std::size_t k = 0; k < nf; ++k)
            w[ops.fine_nodes[k]] -= ops.b_ratio[k] * fn[ops.fine_nodes[k]];
    } else {
        for (std::size_t i = 0; i < n; ++i) w[i] = -w[i];
    }

    // Away from the patch every sub-step correction vanishes and the p
    // sub-steps telescope to u^(n+1) = 2u - u_prev + dt^2 w.
    kernels::leapfrog_update(u, state.u_prev, cfg.dt * cfg.dt, w, next);

    if (nf > 0) {
        std::vector<double>& wg = patch_buf(ws, 0, ng);
        std::vector<double>& up = patch_buf(ws, 1, ng);
        std::vector<double>& uc = patch_buf(ws, 2, ng);
        std::vector<double>& un = patch_buf(ws, 3, ng);
        std::vector<double>& corr = patch_buf(ws, 4, ng);
        std::vector<double>& yg = patch_buf(ws, 5, ng);
        std::vector<double>& xn = patch_buf(ws, 6, nf);

        for (std::size_t g = 0; g < ng; ++g) {
            wg[g] = w[ops.patch_nodes[g]];
            up[g] = u[ops.patch_nodes[g]]; // u~_0 restricted to the patch
        }

        // u~_1 on the patch.
        for (std::size_t k = 0; k < nf; ++k)
            xn[k] = ops.b_ratio[k] * u[ops.fine_nodes[k]];
        ops.a_gn.apply(xn.data(), yg.data());
        for (std::size_t g = 0; g < ng; ++g)
            corr[g] = -ops.inv_m_patch[g] * yg[g];
        if (forced)
            for (std::size_t k = 0; k < nf; ++k)
                corr[ops.n_in_g[k]] += ops.b_ratio[k] * fn[ops.fine_nodes[k]];
        for (std::size_t g = 0; g < ng; ++g)
            uc[g] = up[g] + 0.5 * dtau2 * (wg[g] + corr[g]);

        NodalField& fp = full_buf(ws, kLoadPlus, n);
        NodalField& fm = full_buf(ws, kLoadMinus, n);
        for (int m = 1; m < p; ++m) {
            for (std::size_t k = 0; k < nf; ++k)
                xn[k] = ops.b_ratio[k] * uc[ops.n_in_g[k]];
            ops.a_gn.apply(xn.data(), yg.data());
            for (std::size_t g = 0; g < ng; ++g)
                corr[g] = -ops.inv_m_patch[g] * yg[g];
            if (forced) {
                load(state.t + m * dtau, fp);
                load(state.t - m * dtau, fm);
                for (std::size_t k = 0; k < nf; ++k)
                    corr[ops.n_in_g[k]] += ops.b_ratio[k] * 0.5 *
                                           (fp[ops.fine_nodes[k]] +
                                            fm[ops.fine_nodes[k]]);
            }
            for (std::size_t g = 0; g < ng; ++g)
                un[g] = 2.0 * uc[g] - up[g] + dtau2 * (wg[g] + corr[g]);
            up.swap(uc);
            uc.swap(un);
        }

        for (std::size_t g = 0; g < ng; ++g)
            next[ops.patch_nodes[g]] =
                -state.u_prev[ops.patch_nodes[g]] + 2.0 * uc[g];
    }
    advance(cfg.dt, state, next);
}

} // namespace

void LtsOperators::apply_mass(const NodalField& x, NodalField& y) const {
    if (mass != nullptr)
        mass->apply(x, y);
    else if (lumped_mass != nullptr)
        lumped_mass->apply(x, y);
    else
        throw InvalidArgument("lts: operator bundle has no mass");
}

void LtsOperators::apply_op(const NodalField& x, NodalField& y) const {
    NodalField tmp(n, 0.0);
    stiffness->apply(x, tmp);
    solver->solve(tmp, y);
}

void LtsOperators::apply_restriction(const NodalField& x, NodalField& y) const {
    NodalField tmp(n, 0.0);
    weights->apply(x, tmp);
    solver->solve(tmp, y);
}

LtsOperators build_lts_operators(const SparseOperator& stiffness,
                                 const DiagonalOperator& weights,
                                 const MassSolver& solver,
                                 const SparseOperator* consistent_mass,
                                 const DiagonalOperator* lumped_mass) {
    const std::size_t n = stiffness.rows();
    if ((consistent_mass == nullptr) == (lumped_mass == nullptr))
        throw InvalidArgument(
            "lts: exactly one mass representation must be supplied");
    if (lumped_mass != nullptr && !solver.lumped())
        throw InvalidArgument("lts: lumped mass requires a lumped solver");
    if (consistent_mass != nullptr && solver.lumped())
        throw InvalidArgument("lts: consistent mass requires a CG solver");
    if (weights.rows() != n || solver.rows() != n ||
        (consistent_mass != nullptr && consistent_mass->rows() != n) ||
        (lumped_mass != nullptr && lumped_mass->rows() != n))
        throw InvalidArgument("lts: operator sizes do not match");

    LtsOperators ops;
    ops.n = n;
    ops.stiffness = &stiffness;
    ops.weights = &weights;
    ops.solver = &solver;
    ops.mass = consistent_mass;
    ops.lumped_mass = lumped_mass;

    if (lumped_mass == nullptr) return ops;

    // Precompute the fine patch for the sub-step recursion: N carries D_N,
    // G adds every stiffness-coupled neighbor, a_gn is A(G, N).
    const std::vector<double>& d = weights.diag();
    const std::vector<double>& m = lumped_mass->diag();
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0.0) ops.fine_nodes.push_back(i);
    if (ops.fine_nodes.empty()) return ops;

    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> cols_of(n, npos);
    for (std::size_t k = 0; k < ops.fine_nodes.size(); ++k)
        cols_of[ops.fine_nodes[k]] = k;

    std::vector<unsigned char> in_patch(n, 0);
    for (std::size_t z : ops.fine_nodes) in_patch[z] = 1;
    const auto& row_ptr = stiffness.row_ptr();
    const auto& col_idx = stiffness.col_idx();
    const auto& vals = stiffness.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (cols_of[col_idx[k]] != npos && vals[k] != 0.0) in_patch[i] = 1;
    for (std::size_t i = 0; i < n; ++i)
        if (in_patch[i]) ops.patch_nodes.push_back(i);

    ops.a_gn = stiffness.extract(ops.patch_nodes, cols_of, ops.fine_nodes.size());

    ops.n_in_g.resize(ops.fine_nodes.size());
    for (std::size_t k = 0; k < ops.fine_nodes.size(); ++k) {
        auto it = std::lower_bound(ops.patch_nodes.begin(), ops.patch_nodes.end(),
                                   ops.fine_nodes[k]);
        ops.n_in_g[k] = std::size_t(it - ops.patch_nodes.begin());
    }
    ops.b_ratio.resize(ops.fine_nodes.size());
    for (std::size_t k = 0; k < ops.fine_nodes.size(); ++k) {
        double mz = m[ops.fine_nodes[k]];
        if (!(mz > 0.0))
            throw NumericFailure("lts: lumped mass vanishes on a fine node");
        ops.b_ratio[k] = d[ops.fine_nodes[k]] / mz;
    }
    ops.inv_m_patch.resize(ops.patch_nodes.size());
    for (std::size_t g = 0; g < ops.patch_nodes.size(); ++g) {
        double mz = m[ops.patch_nodes[g]];
        if (!(mz > 0.0))
            throw NumericFailure("lts: lumped mass vanishes on a patch node");
        ops.inv_m_patch[g] = 1.0 / mz;
    }
    return ops;
}

SimState initial_step(const LtsOperators& ops, const StepConfig& cfg,
                      const NodalField& u0, const NodalField& v0,
                      const LoadProvider& load, LtsWorkspace& ws) {
    check_ops(ops);
    if (cfg.p < 1) throw InvalidArgument("lts: sub-step count p must be >= 1");
    if (!(cfg.dt > 0.0)) throw InvalidArgument("lts: step size dt must be positive");
    if (u0.size() != ops.n || v0.size() != ops.n)
        throw InvalidArgument("lts: initial data size does not match the operators");

    const std::size_t n = ops.n;
    NodalField& fn = full_buf(ws, kLoad, n);
    NodalField& t1 = full_buf(ws, kTmpA, n);
    NodalField& t2 = full_buf(ws, kTmpB, n);

    ops.stiffness->apply(u0, t1);
    ops.solver->solve(t1, t2); // t2 = M^{-1} A u0
    if (load) load(0.0, fn);

    SimState state;
    state.u_prev = u0;
    state.u_curr.resize(n);
    const double half_dt2 = 0.5 * cfg.dt * cfg.dt;
    for (std::size_t i = 0; i < n; ++i) {
        double accel = (load ? fn[i] : 0.0) - t2[i];
        state.u_curr[i] = u0[i] + cfg.dt * v0[i] + half_dt2 * accel;
    }
    if (!kernels::all_finite(state.u_curr))
        throw BlowUpDetected("lts: non-finite values after the initial step");
    state.n = 1;
    state.t = cfg.dt;
    state.ref_norm = std::sqrt(
        std::max(kernels::norm2_sq(u0), kernels::norm2_sq(state.u_curr)));
    return state;
}

void lts_lf_step(const LtsOperators& ops, const StepConfig& cfg, SimState& state,
                 const LoadProvider& load, LtsWorkspace& ws) {
    check_step_args(ops, cfg, state);
    if (ops.lumped())
        step_patch(ops, cfg, state, load, ws);
    else
        step_global(ops, cfg, state, load, ws);
}

void apply_asp(const LtsOperators& ops, const StepConfig& cfg,
               const AlphaTable& alphas, const NodalField& u, NodalField& out,
               LtsWorkspace& ws) {
    check_ops(ops);
    if (cfg.p < 1) throw InvalidArgument("lts: sub-step count p must be >= 1");
    if (alphas.p != cfg.p)
        throw InvalidArgument("lts: alpha table was built for a different p");
    if (u.size() != ops.n)
        throw InvalidArgument("lts: vector size does not match the operators");

    const std::size_t n = ops.n;
    NodalField& t1 = full_buf(ws, kAspT1, n);
    if (out.size() != n) out.assign(n, 0.0);

    if (cfg.p == 1) {
        ops.stiffness->apply(u, t1);
        ops.solver->solve(t1, out);
        return;
    }
    if (!(cfg.dt > 0.0)) throw InvalidArgument("lts: step size dt must be positive");

    const double dtau2 = cfg.dtau() * cfg.dtau();
    const int p = cfg.p;
    NodalField& acc = full_buf(ws, kAspAcc, n);
    NodalField& t2 = full_buf(ws, kAspT2, n);

    // Horner accumulation of sum_j alpha_j dtau^(2j) (R A_S)^j u, innermost
    // coefficient first.
    for (std::size_t i = 0; i < n; ++i) acc[i] = alphas.coeffs[p - 2] * u[i];
    for (int j = p - 2; j >= 1; --j) {
        ops.stiffness->apply(acc, t1);
        ops.solver->solve(t1, t2); // t2 = A_S acc (coefficient form)
        ops.weights->apply(t2, t1);
        ops.solver->solve(t1, t2); // t2 = R A_S acc
        for (std::size_t i = 0; i < n; ++i)
            acc[i] = alphas.coeffs[j - 1] * u[i] + dtau2 * t2[i];
    }
    ops.stiffness->apply(acc, t1);
    ops.solver->solve(t1, t2);
    ops.weights->apply(t2, t1);
    ops.solver->solve(t1, t2); // t2 = (R A_S) * (Horner sum)

    const double scale = 2.0 / (double(p) * double(p)) * dtau2;
    for (std::size_t i = 0; i < n; ++i) acc[i] = u[i] - scale * t2[i];
    ops.stiffness->apply(acc, t1);
    ops.solver->solve(t1, out);
}

void lts_lf_step_via_asp(const LtsOperators& ops, const StepConfig& cfg,
                         const AlphaTable& alphas, SimState& state,
                         const LoadProvider& load, LtsWorkspace& ws) {
    check_step_args(ops, cfg, state);
    const std::size_t n = ops.n;
    NodalField& aspu = full_buf(ws, kRestrict, n);
    apply_asp(ops, cfg, alphas, state.u_curr, aspu, ws);

    NodalField& fn = full_buf(ws, kLoad, n);
    NodalField& next = full_buf(ws, kNext, n);
    const bool forced = static_cast<bool>(load);
    if (forced) load(state.t, fn);
    const double dt2 = cfg.dt * cfg.dt;
    for (std::size_t i = 0; i < n; ++i) {
        double rhs = (forced ? fn[i] : 0.0) - aspu[i];
        next[i] = 2.0 * state.u_curr[i] - state.u_prev[i] + dt2 * rhs;
    }
    advance(cfg.dt, state, next);
}

void leapfrog_reference_step(const LtsOperators& ops, double dt, SimState& state,
                             const LoadProvider& load, LtsWorkspace& ws) {
    check_step_args(ops, StepConfig{1, dt, 1.0}, state);
    const std::size_t n = ops.n;
    NodalField& t1 = full_buf(ws, kTmpA, n);
    NodalField& t2 = full_buf(ws, kTmpB, n);
    NodalField& fn = full_buf(ws, kLoad, n);
    NodalField& next = full_buf(ws, kNext, n);

    ops.stiffness->apply(state.u_curr, t1);
    ops.solver->solve(t1, t2);
    const bool forced = static_cast<bool>(load);
    if (forced) load(state.t, fn);
    for (std::size_t i = 0; i < n; ++i) {
        double rhs = (forced ? fn[i] : 0.0) - t2[i];
        next[i] = 2.0 * state.u_curr[i] - state.u_prev[i] + dt * dt * rhs;
    }
    advance(dt, state, next);
}

LambdaEstimate estimate_lambda_max(const OperatorFn& op, const OperatorFn& mass_apply,
                                   std::size_t n, int max_iters, double tol) {
    if (n == 0)
        throw InvalidArgument("lts: eigenvalue estimate needs a nonempty operator");
    if (max_iters < 1)
        throw InvalidArgument("lts: eigenvalue estimate needs at least one iteration");

    std::mt19937 rng(0x5eedcafeu);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    NodalField x(n), y(n, 0.0), my(n, 0.0);
    for (double& v : x) v = dist(rng);

    mass_apply(x, my);
    double nrm2 = kernels::dot(x, my);
    if (!(nrm2 > 0.0))
        throw NumericFailure("lts: start vector has vanishing mass norm");
    double inv = 1.0 / std::sqrt(nrm2);
    for (double& v : x) v *= inv;

    LambdaEstimate est;
    double rho_prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        op(x, y);
        mass_apply(y, my);
        double rho = kernels::dot(x, my); // Rayleigh quotient (x is M-normalized)
        est.value = rho;
        est.residual =
            std::abs(rho - rho_prev) / std::max(std::abs(rho), 1e-300);
        if (it > 0 && est.residual <= tol) {
            est.converged = true;
            break;
        }
        rho_prev = rho;
        double ynrm2 = kernels::dot(y, my);
        if (!(ynrm2 > 0.0)) {
            // The operator annihilates the iterate: the dominant eigenvalue
            // along the explored subspace is exactly zero.
            est.value = 0.0;
            est.converged = true;
            break;
        }
        inv = 1.0 / std::sqrt(ynrm2);
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * inv;
    }
    return est;
}

CflReport verify_cfl(const LtsOperators& ops, const StepConfig& cfg,
                     const AlphaTable& alphas) {
    check_ops(ops);
    if (cfg.p < 1) throw InvalidArgument("lts: sub-step count p must be >= 1");
    if (alphas.p != cfg.p)
        throw InvalidArgument("lts: alpha table was built for a different p");
    if (!(cfg.safety > 0.0 && cfg.safety <= 1.0))
        throw InvalidArgument("lts: safety factor must lie in (0, 1]");

    const double theta = cfg.safety;
    OperatorFn mm = [&ops](const NodalField& x, NodalField& y) {
        ops.apply_mass(x, y);
    };
    LtsWorkspace ws;
    OperatorFn as = [&ops, &ws](const NodalField& x, NodalField& y) {
        NodalField& t1 = full_buf(ws, kTmpA, ops.n);
        ops.stiffness->apply(x, t1);
        ops.solver->solve(t1, y);
    };

    double lam_s = std::abs(estimate_lambda_max(as, mm, ops.n).value);
    if (!(lam_s > 0.0)) throw NumericFailure("lts: stiffness spectrum collapsed");

    CflReport rep;
    if (cfg.p == 1) {
        rep.dt_max = 2.0 * theta / std::sqrt(lam_s);
        rep.lambda_max_asp = lam_s;
        rep.ok = cfg.dt <= 0.0 || cfg.dt * cfg.dt * lam_s < 4.0 * theta * theta;
        return rep;
    }

    auto lam_asp_at = [&](double dt) {
        StepConfig probe{cfg.p, dt, cfg.safety};
        OperatorFn fn = [&](const NodalField& x, NodalField& y) {
            apply_asp(ops, probe, alphas, x, y, ws);
        };
        return std::abs(estimate_lambda_max(fn, mm, ops.n).value);
    };

    // Refine dt_max once, starting from the sub-step bound p * 2/sqrt(lam_s):
    // at that step every sub-cycled mode sits inside the sub-step stability
    // region, so the first spectrum evaluation cannot degenerate.
    const double dt_a = double(cfg.p) * 2.0 / std::sqrt(lam_s);
    const double lam_a = lam_asp_at(dt_a);
    if (!(lam_a > 0.0)) throw NumericFailure("lts: perturbed spectrum collapsed");
    const double dt_b = 2.0 * theta / std::sqrt(lam_a);
    const double lam_b = lam_asp_at(dt_b);
    if (!(lam_b > 0.0)) throw NumericFailure("lts: perturbed spectrum collapsed");
    rep.dt_max = 2.0 * theta / std::sqrt(lam_b);

    if (cfg.dt > 0.0) {
        const double lam_cfg = lam_asp_at(cfg.dt);
        rep.lambda_max_asp = lam_cfg;
        rep.ok = cfg.dt * cfg.dt * lam_cfg < 4.0 * theta * theta;
    } else {
        rep.lambda_max_asp = lam_b;
        rep.ok = true;
    }
    return rep;
}

EnergyRecord discrete_energy(const LtsOperators& ops, const StepConfig& cfg,
                             const AlphaTable& alphas, const SimState& state,
                             LtsWorkspace& ws) {
    check_step_args(ops, cfg, state);
    const std::size_t n = ops.n;
    NodalField& v = full_buf(ws, kLoad, n);
    NodalField& mv = full_buf(ws, kRestrict, n);
    NodalField& aspu = full_buf(ws, kTmpB, n);

    // state.u_curr = u^(n+1), state.u_prev = u^(n)
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (state.u_curr[i] - state.u_prev[i]) / cfg.dt;
    ops.apply_mass(v, mv);
    EnergyRecord rec;
    rec.kinetic = 0.5 * kernels::dot(v, mv);

    apply_asp(ops, cfg, alphas, state.u_curr, aspu, ws);
    ops.apply_mass(state.u_prev, mv);
    rec.potential = 0.5 * kernels::dot(aspu, mv);
    rec.total = rec.kinetic + rec.potential;
    return rec;
}

double m_norm(const LtsOperators& ops, const NodalField& u) {
    if (u.size() != ops.n)
        throw InvalidArgument("lts: vector size does not match the operators");
    NodalField mu(ops.n, 0.0);
    ops.apply_mass(u, mu);
    return std::sqrt(std::max(0.0, kernels::dot(u, mu)));
}

} // namespace ltswave
