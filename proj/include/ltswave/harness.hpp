#ifndef LTSWAVE_HARNESS_HPP
#define LTSWAVE_HARNESS_HPP

#include "ltswave/dofmap.hpp"
#include "ltswave/fem.hpp"
#include "ltswave/lts.hpp"
#include "ltswave/mesh.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ltswave {

enum class Geometry { Interval, UnitSquare, LShape };

enum class Preset {
    Manufactured,       // standing-wave exact solution, Dirichlet
    GaussianNarrow,     // plane wave of width 1e-5 about x0 = 0.25, Neumann
    GaussianResolvable, // same shape with width 0.02 (mesh-resolvable)
};

/// One experiment configuration; the CLI binds config files onto this.
struct ExperimentSpec {
    Geometry geometry = Geometry::Interval;
    int levels = 4;   // refinement levels for studies over meshes
    int degree = 1;   // Lagrange degree m
    bool lumping = true;
    int p = 1;        // sub-steps per global step
    double T = 0.5;
    double dt = 0.0;  // > 0: fixed step; 0: resolve via verify_cfl
    double safety = 0.95;
    Preset preset = Preset::Manufactured;

    // L-shape builder parameters
    double h_init = 0.25;
    int corner_refinements = 2;
    int global_refinements = 0;

    // Gaussian plane-wave data; width 0 picks the preset default
    // (1e-5 for the narrow pulse, 0.02 for the resolvable one)
    double gauss_delta = 0.0;
    double gauss_x0 = 0.25;

    std::string out_dir; // required by runs that emit files

    /// Throws InvalidArgument on violated invariants (T > 0, levels >= 1,
    /// degree-2 lumping, ...).
    void validate() const;
};

/// Analytic standing-wave solution with f = 0:
///   interval:    u = cos(pi t) sin(pi x), homogeneous Dirichlet
///   unit square: u = cos(sqrt(2) pi t) sin(pi x) sin(pi y), Dirichlet
/// The frequency satisfies the dispersion relation w^2 = |k|^2.
struct ManufacturedSolution {
    std::function<double(Point, double)> u;    // exact solution u(x, t)
    std::function<double(Point, double)> ut;   // time derivative
    std::function<Point(Point, double)> grad;  // spatial gradient
    std::function<double(Point, double)> f;    // forcing (identically zero)
    std::vector<int> dirichlet_tags;
};

/// Throws InvalidArgument for geometries with no built-in mode (L-shape).
ManufacturedSolution manufactured_solution(Geometry geometry);

/// Everything one simulation needs, with stable addresses: LtsOperators
/// points into the owned members, so the struct is pinned on the heap.
struct AssembledProblem {
    Mesh mesh;
    DofMap dofs;
    SparseOperator mass;     // when lumping is off
    DiagonalOperator lumped; // when lumping is on
    SparseOperator stiffness;
    DiagonalOperator weights;
    std::unique_ptr<MassSolver> solver;
    LtsOperators ops;
    NodalField u0, v0;

    AssembledProblem() = default;
    AssembledProblem(const AssembledProblem&) = delete;
    AssembledProblem& operator=(const AssembledProblem&) = delete;
};

/// Build mesh, operators, and initial data for `spec` at refinement level
/// `level` (interval: 8·2^level segments; unit square: 4·2^level; L-shape:
/// `level` extra global refinements on top of spec.global_refinements).
/// Manufactured geometries get a band of elements tagged fine when p > 1;
/// the L-shape uses the corner partition with one overlap layer.
std::unique_ptr<AssembledProblem> assemble_problem(const ExperimentSpec& spec,
                                                   int level);

struct ConvergenceRow {
    double h = 0.0;
    double dt = 0.0;
    double l2_error = 0.0;
    double h1_error = 0.0;
    double rate = 0.0; // log2(previous/this); NaN on the first row
    bool failed = false;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
};

enum class ConvergenceMode {
    Spatial,  // dt ~ h^((m+1)/2) so neither error term dominates
    Temporal, // fixed finest mesh, dt halvings, fine-reference control
};

/// March the manufactured problem across levels (spatial) or dt halvings
/// (temporal) and tabulate errors at t = T with observed log2 rates.
/// Blow-ups are recorded as failed rows rather than thrown.
ConvergenceTable run_convergence(const ExperimentSpec& spec, ConvergenceMode mode);

struct StabilityPoint {
    double dt = 0.0;
    bool stable = false;
    double growth = 0.0; // max over steps of |u|_M / |u0|_M
};

/// March 2000 steps at each dt; stable means no blow-up and growth <= 10.
std::vector<StabilityPoint> run_stability_sweep(const ExperimentSpec& spec,
                                                const std::vector<double>& dt_grid);

/// Bisect the stable/unstable transition of the 2000-step criterion
/// inside [lo, hi]; classification at the endpoints is re-used, so the
/// result is meaningful only when lo is stable and hi is not.
double locate_stability_threshold(const ExperimentSpec& spec, double lo,
                                  double hi, int iterations = 12);

struct WorkModel {
    std::size_t coarse_rhs_evals = 0; // operator rows per global step, coarse
    std::size_t fine_rhs_evals = 0;   // operator rows per global step, patch
    double predicted_speedup = 1.0;   // p·N_total / (coarse + fine)
};

/// Operator-application counting model: the global scheme at dt/p costs
/// p·N_total rows per global step; sub-cycling costs (N_total − N_patch)
/// + p·N_patch, where the patch is the fine node set plus its one-element
/// neighborhood.
WorkModel work_model(const Mesh& mesh, const DofMap& dofmap, const StepConfig& cfg);

struct RuntimeLevel {
    int level = 0;
    std::size_t n_total = 0;
    std::size_t n_fine = 0;  // nodes of fine-tagged elements
    std::size_t n_patch = 0; // fine nodes plus the coupled neighborhood
    double t_lts = 0.0;      // seconds, median of 3
    double t_lf = 0.0;       // global leap-frog at dt/p
    double speedup = 0.0;    // t_lf / t_lts
    double predicted = 0.0;  // work_model prediction
};

struct RuntimeReport {
    std::vector<RuntimeLevel> levels;
};

/// Time the sub-cycled scheme against the global reference at dt/p over
/// `levels` successive refinement levels of `spec` (single-threaded,
/// monotonic clock, median of 3 runs each).
RuntimeReport run_speedup_study(const ExperimentSpec& spec, int levels);

struct LShapeResult {
    std::vector<std::string> snapshot_files; // t = 0, 0.1, 0.3, 0.4, 0.5, 0.6
    std::string energy_csv;
    std::string runtime_csv;
    double energy_drift = 0.0;        // |E(T) − E(0)| / E(0)
    double rel_l2_vs_reference = 0.0; // against global leap-frog at dt/p
    RuntimeReport runtime;            // single level: the configured one
};

/// The corner-refined L-shape experiment: snapshots, energy trace, and a
/// runtime comparison, all written under spec.out_dir.
LShapeResult run_lshape(const ExperimentSpec& spec);

void write_convergence_csv(const ConvergenceTable& table, const std::string& path);
void write_stability_csv(const std::vector<StabilityPoint>& points,
                         const std::string& path);
void write_runtime_csv(const RuntimeReport& report, const std::string& path);

} // namespace ltswave

#endif
