#include "ltswave/harness.hpp"

#include "ltswave/alpha.hpp"
#include "ltswave/errors.hpp"
#include "ltswave/io.hpp"
#include "ltswave/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace ltswave {

namespace {

constexpr double kPi = 3.14159265358979323846;

double quiet_nan() {
    return std::numeric_limits<double>::quiet_NaN();
}

std::size_t steps_to_reach(double T, double dt) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
}

double max_diameter(const Mesh& mesh) {
    double h = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        h = std::max(h, mesh.element_diameter(e));
    return h;
}

Mesh mesh_for(const ExperimentSpec& spec, int level) {
    switch (spec.geometry) {
    case Geometry::Interval: {
        Mesh m = build_uniform_interval(std::size_t(8) << level);
        if (spec.p > 1)
            tag_fine_band(m, 0.4, 0.6);
        return m;
    }
    case Geometry::UnitSquare: {
        Mesh m = build_unit_square(std::size_t(4) << level);
        if (spec.p > 1)
            tag_fine_band(m, 0.4, 0.6);
        return m;
    }
    case Geometry::LShape: {
        const int g = spec.global_refinements + level;
        Mesh m = build_lshape_mesh(spec.h_init / double(1u << g));
        for (int r = 0; r < spec.corner_refinements; ++r)
            refine_corner(m, 0.5, 0.5);
        partition_fine(m, default_fine_threshold(m), 1);
        return m;
    }
    }
    throw InvalidArgument("harness: unknown geometry");
}

SpatialFn gaussian_bump(double x0, double delta) {
    return [x0, delta](Point x) {
        const double s = (x.x - x0) / delta;
        return std::exp(-s * s);
    };
}

double effective_delta(const ExperimentSpec& spec) {
    if (spec.gauss_delta > 0.0)
        return spec.gauss_delta;
    return spec.preset == Preset::GaussianResolvable ? 0.02 : 1e-5;
}

/// Resolve dt: fixed when configured, else the verified spectral bound.
double resolve_dt(const AssembledProblem& prob, const ExperimentSpec& spec) {
    if (spec.dt > 0.0)
        return spec.dt;
    StepConfig cfg{spec.p, 0.0, spec.safety};
    const AlphaTable alphas = alpha_recursive(spec.p);
    const CflReport rep = verify_cfl(prob.ops, cfg, alphas);
    if (!(rep.dt_max > 0.0))
        throw NumericFailure("harness: CFL resolution produced no usable step");
    return rep.dt_max;
}

/// March `n_steps`, tracking the worst M-norm growth factor.  Returns the
/// growth and whether the run blew up (never throws for blow-ups).
struct GrowthResult {
    double growth = 0.0;
    bool blew_up = false;
};

GrowthResult march_growth(const AssembledProblem& prob, const StepConfig& cfg,
                          std::size_t n_steps) {
    LtsWorkspace ws;
    GrowthResult out;
    try {
        SimState state = initial_step(prob.ops, cfg, prob.u0, prob.v0, {}, ws);
        const double m0 = m_norm(prob.ops, prob.u0);
        if (!(m0 > 0.0))
            throw InvalidArgument("harness: stability runs need nonzero initial data");
        out.growth = m_norm(prob.ops, state.u_curr) / m0;
        for (std::size_t k = 1; k < n_steps; ++k) {
            lts_lf_step(prob.ops, cfg, state, {}, ws);
            out.growth = std::max(out.growth, m_norm(prob.ops, state.u_curr) / m0);
        }
    } catch (const BlowUpDetected&) {
        out.blew_up = true;
        out.growth = std::numeric_limits<double>::infinity();
    }
    return out;
}

/// Median-of-3 wall time of `body`, repeating it enough times per sample
/// that each sample spans at least ~30 ms.
double median_time(const std::function<void()>& body) {
    using clock = std::chrono::steady_clock;
    auto sample = [&](std::size_t reps) {
        const auto start = clock::now();
        for (std::size_t r = 0; r < reps; ++r)
            body();
        return std::chrono::duration<double>(clock::now() - start).count() /
               double(reps);
    };
    const double once = std::max(sample(1), 1e-9);
    const auto reps =
        static_cast<std::size_t>(std::clamp(0.03 / once, 1.0, 2000.0));
    double t0 = sample(reps), t1 = sample(reps), t2 = sample(reps);
    if (t0 > t1) std::swap(t0, t1);
    if (t1 > t2) std::swap(t1, t2);
    if (t0 > t1) std::swap(t0, t1);
    return t1;
}

} // namespace

void ExperimentSpec::validate() const {
    if (!(T > 0.0))
        throw InvalidArgument("experiment: final time T must be positive");
    if (levels < 1)
        throw InvalidArgument("experiment: need at least one level");
    if (degree != 1 && degree != 2)
        throw InvalidArgument("experiment: degree must be 1 or 2");
    if (degree == 2 && lumping)
        throw InvalidArgument(
            "experiment: mass lumping is only meaningful for degree 1");
    if (p < 1)
        throw InvalidArgument("experiment: sub-step count p must be >= 1");
    if (dt < 0.0)
        throw InvalidArgument("experiment: dt must be positive or 0 (auto)");
    if (!(safety > 0.0) || safety > 1.0)
        throw InvalidArgument("experiment: safety must lie in (0, 1]");
    if (corner_refinements < 0 || global_refinements < 0)
        throw InvalidArgument("experiment: refinement counts must be >= 0");
    if (gauss_delta < 0.0)
        throw InvalidArgument("experiment: plane-wave width must be positive");
}

ManufacturedSolution manufactured_solution(Geometry geometry) {
    ManufacturedSolution m;
    switch (geometry) {
    case Geometry::Interval: {
        const double w = kPi;
        m.u = [w](Point x, double t) { return std::cos(w * t) * std::sin(kPi * x.x); };
        m.ut = [w](Point x, double t) {
            return -w * std::sin(w * t) * std::sin(kPi * x.x);
        };
        m.grad = [w](Point x, double t) {
            return Point{kPi * std::cos(w * t) * std::cos(kPi * x.x), 0.0};
        };
        m.f = [](Point, double) { return 0.0; };
        m.dirichlet_tags = {0};
        return m;
    }
    case Geometry::UnitSquare: {
        const double w = std::sqrt(2.0) * kPi;
        m.u = [w](Point x, double t) {
            return std::cos(w * t) * std::sin(kPi * x.x) * std::sin(kPi * x.y);
        };
        m.ut = [w](Point x, double t) {
            return -w * std::sin(w * t) * std::sin(kPi * x.x) * std::sin(kPi * x.y);
        };
        m.grad = [w](Point x, double t) {
            const double c = std::cos(w * t);
            return Point{kPi * c * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                         kPi * c * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
        };
        m.f = [](Point, double) { return 0.0; };
        m.dirichlet_tags = {0};
        return m;
    }
    case Geometry::LShape:
        throw InvalidArgument(
            "manufactured_solution: no built-in mode for the L-shape geometry");
    }
    throw InvalidArgument("manufactured_solution: unknown geometry");
}

std::unique_ptr<AssembledProblem> assemble_problem(const ExperimentSpec& spec,
                                                   int level) {
    spec.validate();
    auto prob = std::make_unique<AssembledProblem>();
    prob->mesh = mesh_for(spec, level);

    std::vector<int> dirichlet;
    if (spec.preset == Preset::Manufactured)
        dirichlet = manufactured_solution(spec.geometry).dirichlet_tags;
    prob->dofs = build_dofmap(prob->mesh, spec.degree, dirichlet);

    std::vector<unsigned char> fine = fine_node_set(prob->mesh, prob->dofs);
    for (std::size_t i = 0; i < fine.size(); ++i)
        if (prob->dofs.dirichlet_mask[i])
            fine[i] = 0;
    prob->weights = assemble_restriction_weights(prob->mesh, prob->dofs, fine);

    prob->stiffness =
        assemble_stiffness(prob->mesh, prob->dofs, [](Point) { return 1.0; });
    prob->stiffness.eliminate(prob->dofs.dirichlet_mask);

    if (spec.lumping) {
        prob->lumped = assemble_lumped_mass(prob->mesh, prob->dofs);
        prob->solver = std::make_unique<MassSolver>(prob->lumped);
        prob->ops = build_lts_operators(prob->stiffness, prob->weights,
                                        *prob->solver, nullptr, &prob->lumped);
    } else {
        prob->mass = assemble_mass(prob->mesh, prob->dofs);
        prob->mass.eliminate(prob->dofs.dirichlet_mask);
        prob->solver = std::make_unique<MassSolver>(prob->mass);
        prob->ops = build_lts_operators(prob->stiffness, prob->weights,
                                        *prob->solver, &prob->mass, nullptr);
    }

    switch (spec.preset) {
    case Preset::Manufactured: {
        const ManufacturedSolution mode = manufactured_solution(spec.geometry);
        prob->u0 = project_l2(prob->mesh, prob->dofs, *prob->solver,
                              [&mode](Point x) { return mode.u(x, 0.0); });
        prob->v0 = project_l2(prob->mesh, prob->dofs, *prob->solver,
                              [&mode](Point x) { return mode.ut(x, 0.0); });
        break;
    }
    case Preset::GaussianNarrow: {
        // A pulse this narrow is far below any quadrature resolution, so
        // an L2 projection integrates to zero; the nodal interpolant is the
        // faithful under-resolved representation (nonzero exactly on the
        // node column at x0).
        const SpatialFn g = gaussian_bump(spec.gauss_x0, effective_delta(spec));
        prob->u0.resize(prob->dofs.n_dofs());
        for (std::size_t i = 0; i < prob->u0.size(); ++i)
            prob->u0[i] = g(prob->dofs.nodes[i]);
        zero_dirichlet(prob->u0, prob->dofs.dirichlet_mask);
        prob->v0.assign(prob->dofs.n_dofs(), 0.0);
        break;
    }
    case Preset::GaussianResolvable: {
        const SpatialFn g = gaussian_bump(spec.gauss_x0, effective_delta(spec));
        prob->u0 = project_l2(prob->mesh, prob->dofs, *prob->solver, g);
        prob->v0.assign(prob->dofs.n_dofs(), 0.0);
        break;
    }
    }
    return prob;
}

ConvergenceTable run_convergence(const ExperimentSpec& spec, ConvergenceMode mode) {
    spec.validate();
    if (spec.preset != Preset::Manufactured)
        throw InvalidArgument("convergence study requires the manufactured preset");
    const ManufacturedSolution exact = manufactured_solution(spec.geometry);

    ConvergenceTable table;
    LtsWorkspace ws;

    if (mode == ConvergenceMode::Spatial) {
        // dt ~ h^((m+1)/2) equalizes the h^(m+1) and dt^2 error terms; the
        // constant keeps every level inside the verified CFL bound.
        const double c_dt = spec.degree == 1 ? 0.4 : 0.25;
        const double expo = 0.5 * double(spec.degree + 1);
        for (int level = 0; level < spec.levels; ++level) {
            auto prob = assemble_problem(spec, level);
            const double h = max_diameter(prob->mesh);
            ConvergenceRow row;
            row.h = h;
            try {
                const double dt_cfl = resolve_dt(*prob, spec);
                row.dt = std::min(0.85 * dt_cfl, c_dt * std::pow(h, expo));
                const StepConfig cfg{spec.p, row.dt, spec.safety};
                const std::size_t n_steps = steps_to_reach(spec.T, row.dt);
                SimState state =
                    initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
                for (std::size_t k = 1; k < n_steps; ++k)
                    lts_lf_step(prob->ops, cfg, state, {}, ws);
                const double t_end = double(n_steps) * row.dt;
                row.l2_error = l2_error_vs_exact(
                    prob->mesh, prob->dofs, state.u_curr,
                    [&](Point x) { return exact.u(x, t_end); });
                row.h1_error = h1_error_vs_exact(
                    prob->mesh, prob->dofs, state.u_curr,
                    [&](Point x) { return exact.u(x, t_end); },
                    [&](Point x) { return exact.grad(x, t_end); });
            } catch (const BlowUpDetected&) {
                row.failed = true;
                row.l2_error = row.h1_error = quiet_nan();
            }
            table.rows.push_back(row);
        }
    } else {
        // Fixed finest mesh; halve dt and control against a leap-frog run
        // at dt_finest/16, so the fixed spatial bias cancels and the pure
        // O(dt^2) time error is observable.
        auto prob = assemble_problem(spec, spec.levels - 1);
        const double h = max_diameter(prob->mesh);
        const double dt_cfl = resolve_dt(*prob, spec);
        const auto n0 = std::max<std::size_t>(steps_to_reach(spec.T, 0.8 * dt_cfl), 2);

        const std::size_t finest_mult = std::size_t(1) << (spec.levels - 1);
        const double dt_ref = spec.T / double(n0 * finest_mult * 16);
        SimState ref = initial_step(prob->ops, StepConfig{1, dt_ref, spec.safety},
                                    prob->u0, prob->v0, {}, ws);
        for (std::size_t k = 1; k < n0 * finest_mult * 16; ++k)
            leapfrog_reference_step(prob->ops, dt_ref, ref, {}, ws);

        NodalField diff(prob->ops.n), sdiff(prob->ops.n);
        for (int level = 0; level < spec.levels; ++level) {
            const std::size_t n_steps = n0 * (std::size_t(1) << level);
            ConvergenceRow row;
            row.h = h;
            row.dt = spec.T / double(n_steps);
            try {
                const StepConfig cfg{spec.p, row.dt, spec.safety};
                SimState state =
                    initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
                for (std::size_t k = 1; k < n_steps; ++k)
                    lts_lf_step(prob->ops, cfg, state, {}, ws);
                for (std::size_t i = 0; i < prob->ops.n; ++i)
                    diff[i] = state.u_curr[i] - ref.u_curr[i];
                row.l2_error = m_norm(prob->ops, diff);
                prob->stiffness.apply(diff, sdiff);
                row.h1_error = std::sqrt(row.l2_error * row.l2_error +
                                         std::max(0.0, kernels::dot(diff, sdiff)));
            } catch (const BlowUpDetected&) {
                row.failed = true;
                row.l2_error = row.h1_error = quiet_nan();
            }
            table.rows.push_back(row);
        }
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ConvergenceRow& row = table.rows[r];
        if (r == 0 || row.failed || table.rows[r - 1].failed)
            row.rate = quiet_nan();
        else
            row.rate = std::log2(table.rows[r - 1].l2_error / row.l2_error);
    }
    return table;
}

std::vector<StabilityPoint> run_stability_sweep(const ExperimentSpec& spec,
                                                const std::vector<double>& dt_grid) {
    spec.validate();
    auto prob = assemble_problem(spec, 0);
    std::vector<StabilityPoint> out;
    out.reserve(dt_grid.size());
    for (double dt : dt_grid) {
        if (!(dt > 0.0))
            throw InvalidArgument("stability sweep: dt grid must be positive");
        const GrowthResult g =
            march_growth(*prob, StepConfig{spec.p, dt, spec.safety}, 2000);
        out.push_back({dt, !g.blew_up && g.growth <= 10.0, g.growth});
    }
    return out;
}

double locate_stability_threshold(const ExperimentSpec& spec, double lo, double hi,
                                  int iterations) {
    spec.validate();
    if (!(0.0 < lo && lo < hi))
        throw InvalidArgument("stability threshold: need 0 < lo < hi");
    auto prob = assemble_problem(spec, 0);
    auto stable_at = [&](double dt) {
        const GrowthResult g =
            march_growth(*prob, StepConfig{spec.p, dt, spec.safety}, 2000);
        return !g.blew_up && g.growth <= 10.0;
    };
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        (stable_at(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

WorkModel work_model(const Mesh& mesh, const DofMap& dofmap, const StepConfig& cfg) {
    if (cfg.p < 1)
        throw InvalidArgument("work model: sub-step count p must be >= 1");
    const std::vector<unsigned char> fine = fine_node_set(mesh, dofmap);
    std::vector<unsigned char> patch = fine;
    const std::size_t nd = dofmap.dofs_per_elem();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const std::size_t* dofs = dofmap.dofs_of(e);
        bool touches = false;
        for (std::size_t k = 0; k < nd && !touches; ++k)
            touches = fine[dofs[k]] != 0;
        if (touches)
            for (std::size_t k = 0; k < nd; ++k)
                patch[dofs[k]] = 1;
    }
    const auto n_total = dofmap.n_dofs();
    std::size_t n_patch = 0;
    for (unsigned char m : patch)
        n_patch += m;

    WorkModel out;
    out.coarse_rhs_evals = n_total - n_patch;
    out.fine_rhs_evals = std::size_t(cfg.p) * n_patch;
    out.predicted_speedup = double(cfg.p) * double(n_total) /
                            double(out.coarse_rhs_evals + out.fine_rhs_evals);
    return out;
}

namespace {

RuntimeLevel time_level(const ExperimentSpec& spec, int level) {
    auto prob = assemble_problem(spec, level);
    const double dt = resolve_dt(*prob, spec);
    const StepConfig cfg{spec.p, dt, spec.safety};
    const std::size_t n_steps = steps_to_reach(spec.T, dt);
    const double dt_ref = dt / double(spec.p);

    RuntimeLevel row;
    row.level = level;
    row.n_total = prob->dofs.n_dofs();
    const std::vector<unsigned char> fine = fine_node_set(prob->mesh, prob->dofs);
    for (unsigned char m : fine)
        row.n_fine += m;
    const WorkModel model = work_model(prob->mesh, prob->dofs, cfg);
    row.n_patch = row.n_total - model.coarse_rhs_evals;
    row.predicted = model.predicted_speedup;

    LtsWorkspace ws;
    row.t_lts = median_time([&] {
        SimState state = initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
        for (std::size_t k = 1; k < n_steps; ++k)
            lts_lf_step(prob->ops, cfg, state, {}, ws);
    });
    row.t_lf = median_time([&] {
        SimState state = initial_step(prob->ops, StepConfig{1, dt_ref, spec.safety},
                                      prob->u0, prob->v0, {}, ws);
        for (std::size_t k = 1; k < n_steps * std::size_t(spec.p); ++k)
            leapfrog_reference_step(prob->ops, dt_ref, state, {}, ws);
    });
    row.speedup = row.t_lf / row.t_lts;
    return row;
}

} // namespace

RuntimeReport run_speedup_study(const ExperimentSpec& spec, int levels) {
    spec.validate();
    if (levels < 1)
        throw InvalidArgument("speedup study: need at least one level");
    RuntimeReport report;
    for (int level = 0; level < levels; ++level)
        report.levels.push_back(time_level(spec, level));
    return report;
}

LShapeResult run_lshape(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.geometry != Geometry::LShape)
        throw InvalidArgument("run_lshape: geometry must be the L-shape");
    if (spec.out_dir.empty())
        throw InvalidArgument("run_lshape: output directory is required");
    ensure_directory(spec.out_dir);

    auto prob = assemble_problem(spec, 0);
    const double dt = resolve_dt(*prob, spec);
    const StepConfig cfg{spec.p, dt, spec.safety};
    const AlphaTable alphas = alpha_recursive(spec.p);
    const std::size_t n_steps = steps_to_reach(spec.T, dt);

    LShapeResult result;
    LtsWorkspace ws;

    // --- instrumented sub-cycled run: snapshots + energy trace -----------
    const std::vector<double> snapshot_times = {0.0, 0.1, 0.3, 0.4, 0.5, 0.6};
    std::size_t next_snap = 0;
    auto emit_snapshot = [&](const NodalField& u) {
        const std::string path = spec.out_dir + "/" +
                                 vtk_series_name("solution", next_snap);
        write_vtk(path, prob->mesh,
                  std::vector<double>(u.begin(),
                                      u.begin() + long(prob->mesh.points.size())),
                  "u");
        result.snapshot_files.push_back(path);
        ++next_snap;
    };

    result.energy_csv = spec.out_dir + "/energy.csv";
    CsvWriter energy(result.energy_csv,
                     {"n", "t", "kinetic", "potential", "total", "l2_norm"});

    emit_snapshot(prob->u0); // t = 0
    SimState state = initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
    double e_first = 0.0, e_last = 0.0;
    auto record_energy = [&]() {
        const EnergyRecord e = discrete_energy(prob->ops, cfg, alphas, state, ws);
        energy.row({csv_int(static_cast<long long>(state.n)), csv_num(state.t),
                    csv_num(e.kinetic), csv_num(e.potential), csv_num(e.total),
                    csv_num(m_norm(prob->ops, state.u_curr))});
        e_last = e.total;
        if (state.n == 1)
            e_first = e.total;
        while (next_snap < snapshot_times.size() &&
               state.t >= snapshot_times[next_snap] - 1e-12)
            emit_snapshot(state.u_curr);
    };
    record_energy();
    for (std::size_t k = 1; k < n_steps; ++k) {
        lts_lf_step(prob->ops, cfg, state, {}, ws);
        record_energy();
    }
    energy.close();
    result.energy_drift =
        std::abs(e_last - e_first) / std::max(std::abs(e_first), 1e-300);

    // --- reference leap-frog at dt/p and the agreement diagnostic --------
    const double dt_ref = dt / double(spec.p);
    SimState ref = initial_step(prob->ops, StepConfig{1, dt_ref, spec.safety},
                                prob->u0, prob->v0, {}, ws);
    for (std::size_t k = 1; k < n_steps * std::size_t(spec.p); ++k)
        leapfrog_reference_step(prob->ops, dt_ref, ref, {}, ws);
    NodalField diff(prob->ops.n);
    for (std::size_t i = 0; i < prob->ops.n; ++i)
        diff[i] = state.u_curr[i] - ref.u_curr[i];
    result.rel_l2_vs_reference =
        m_norm(prob->ops, diff) / std::max(m_norm(prob->ops, ref.u_curr), 1e-300);

    // --- runtime comparison on the configured level ----------------------
    result.runtime.levels.push_back(time_level(spec, 0));
    result.runtime_csv = spec.out_dir + "/runtime.csv";
    write_runtime_csv(result.runtime, result.runtime_csv);
    return result;
}

void write_convergence_csv(const ConvergenceTable& table, const std::string& path) {
    CsvWriter csv(path, {"h", "dt", "l2_error", "h1_error", "rate", "failed"});
    for (const ConvergenceRow& r : table.rows)
        csv.row({csv_num(r.h), csv_num(r.dt), csv_num(r.l2_error),
                 csv_num(r.h1_error), csv_num(r.rate), csv_int(r.failed ? 1 : 0)});
}

void write_stability_csv(const std::vector<StabilityPoint>& points,
                         const std::string& path) {
    CsvWriter csv(path, {"dt", "stable", "growth"});
    for (const StabilityPoint& p : points)
        csv.row({csv_num(p.dt), csv_int(p.stable ? 1 : 0), csv_num(p.growth)});
}

void write_runtime_csv(const RuntimeReport& report, const std::string& path) {
    CsvWriter csv(path, {"level", "n_total", "n_fine", "n_patch", "t_lts", "t_lf",
                         "speedup", "predicted_speedup"});
    for (const RuntimeLevel& r : report.levels)
        csv.row({csv_int(r.level), csv_int(static_cast<long long>(r.n_total)),
                 csv_int(static_cast<long long>(r.n_fine)), csv_int(static_cast<long long>(r.n_patch)),
                 csv_num(r.t_lts), csv_num(r.t_lf), csv_num(r.speedup),
                 csv_num(r.predicted)});
}

} // namespace ltswave
