// Kernel benchmark: serial reference vs OpenMP variants of the hot loops
// (CSR matrix-vector product and the leap-frog update), plus a whole-step
// comparison on an assembled problem.  The OpenMP variants must be
// bitwise-identical to the serial ones; the table reports the measured
// speedup at the configured thread count.
//
// Usage: bench_kernels [threads]

#include "ltswave/fem.hpp"
#include "ltswave/harness.hpp"
#include "ltswave/kernels.hpp"
#include "ltswave/mesh.hpp"
#include "ltswave/sparse.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

using namespace ltswave;

namespace {

double time_reps(const std::function<void()>& body) {
    using clock = std::chrono::steady_clock;
    auto sample = [&](std::size_t reps) {
        const auto start = clock::now();
        for (std::size_t r = 0; r < reps; ++r)
            body();
        return std::chrono::duration<double>(clock::now() - start).count() /
               double(reps);
    };
    const double once = std::max(sample(1), 1e-9);
    const auto reps = static_cast<std::size_t>(
        std::min(std::max(0.05 / once, 1.0), 20000.0));
    double best = sample(reps);
    for (int k = 0; k < 2; ++k)
        best = std::min(best, sample(reps));
    return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void bench_spmv(const SparseOperator& A, const char* label, int threads) {
    const std::size_t n = A.rows();
    std::mt19937 rng(1234u);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> x(n), y_s(n), y_p(n);
    for (double& v : x)
        v = val(rng);

    const double t_serial = time_reps([&] {
        kernels::spmv_serial(n, A.row_ptr().data(), A.col_idx().data(),
                             A.values().data(), x.data(), y_s.data());
    });
    const double t_parallel = time_reps([&] {
        kernels::spmv_parallel(n, A.row_ptr().data(), A.col_idx().data(),
                               A.values().data(), x.data(), y_p.data());
    });

    std::printf("%-28s %9zu %10zu %3d %12.3e %12.3e %7.2fx %10.1e\n", label, n,
                A.nnz(), threads, t_serial, t_parallel,
                t_serial / t_parallel, max_abs_diff(y_s, y_p));
}

void bench_leapfrog(std::size_t n, int threads) {
    std::mt19937 rng(99u);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> u(n), up(n), w(n), out_s(n), out_p(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = val(rng);
        up[i] = val(rng);
        w[i] = val(rng);
    }

    kernels::set_threads(1);
    const double t_serial =
        time_reps([&] { kernels::leapfrog_update(u, up, 1e-4, w, out_s); });
    kernels::set_threads(threads);
    const double t_parallel =
        time_reps([&] { kernels::leapfrog_update(u, up, 1e-4, w, out_p); });

    char label[64];
    std::snprintf(label, sizeof label, "leapfrog_update n=%zu", n);
    std::printf("%-28s %9zu %10s %3d %12.3e %12.3e %7.2fx %10.1e\n", label, n,
                "-", threads, t_serial, t_parallel, t_serial / t_parallel,
                max_abs_diff(out_s, out_p));
}

void bench_full_step(int threads) {
    ExperimentSpec spec;
    spec.geometry = Geometry::LShape;
    spec.preset = Preset::GaussianNarrow;
    spec.p = 4;
    spec.global_refinements = 3;
    auto prob = assemble_problem(spec, 0);

    const AlphaTable alphas = alpha_recursive(spec.p);
    const CflReport rep =
        verify_cfl(prob->ops, StepConfig{spec.p, 0.0, spec.safety}, alphas);
    const StepConfig cfg{spec.p, rep.dt_max, spec.safety};

    LtsWorkspace ws;
    auto march = [&] {
        SimState state = initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
        for (int k = 0; k < 20; ++k)
            lts_lf_step(prob->ops, cfg, state, {}, ws);
        return state;
    };

    kernels::set_threads(1);
    const SimState ref = march();
    const double t_serial = time_reps([&] { march(); });
    kernels::set_threads(threads);
    const SimState par = march();
    const double t_parallel = time_reps([&] { march(); });

    std::printf("%-28s %9zu %10s %3d %12.3e %12.3e %7.2fx %10.1e\n",
                "lts_lf_step x20 (L-shape)", prob->ops.n, "-", threads,
                t_serial, t_parallel, t_serial / t_parallel,
                max_abs_diff(ref.u_curr, par.u_curr));
}

} // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : 4;
    if (threads < 1) {
        std::fprintf(stderr, "usage: bench_kernels [threads >= 1]\n");
        return 2;
    }

    std::printf("%-28s %9s %10s %3s %12s %12s %8s %10s\n", "kernel", "n", "nnz",
                "thr", "t_serial", "t_parallel", "speedup", "max_diff");

    // Assembled stiffness matrices of increasing size.
    for (int g = 2; g <= 4; ++g) {
        Mesh mesh = build_lshape_mesh(0.25 / double(1 << g));
        for (int r = 0; r < 2; ++r)
            refine_corner(mesh, 0.5, 0.5);
        const DofMap dofs = build_dofmap(mesh, 1, {});
        const SparseOperator A =
            assemble_stiffness(mesh, dofs, [](Point) { return 1.0; });
        char label[64];
        std::snprintf(label, sizeof label, "spmv stiffness g=%d", g);
        kernels::set_threads(threads);
        bench_spmv(A, label, threads);
    }

    for (std::size_t n : {std::size_t(10000), std::size_t(1000000)})
        bench_leapfrog(n, threads);

    bench_full_step(threads);

    kernels::set_threads(1);
    return 0;
}
