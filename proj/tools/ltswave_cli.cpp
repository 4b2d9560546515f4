// ltswave: solver CLI with three subcommands.
//   alpha   print the stability-polynomial coefficient table
//   run     execute a configured experiment and write its artifacts
//   verify  assemble operators and report the spectral CFL bound
// Exit codes: 0 ok, 1 numeric failure (blow-up), 2 usage/config error.

#include "CLI11.hpp"

#include "ltswave/alpha.hpp"
#include "ltswave/config.hpp"
#include "ltswave/errors.hpp"
#include "ltswave/harness.hpp"
#include "ltswave/io.hpp"
#include "ltswave/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace ltswave;

int cmd_alpha(int p, const std::string& format) {
    const AlphaTable rec = alpha_recursive(p);
    const AlphaTable closed = alpha_closed_form(p);

    if (format == "text") {
        std::printf("%4s %24s %24s %12s\n", "j", "recursive", "closed_form",
                    "rel_diff");
        for (int j = 1; j <= p - 1; ++j) {
            const double a = rec.coeffs[j - 1];
            const double b = closed.coeffs[j - 1];
            const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
            std::printf("%4d %24.16e %24.16e %12.3e\n", j, a, b, rel);
        }
    } else {
        std::printf("j,alpha_recursive,alpha_closed_form,rel_diff\n");
        for (int j = 1; j <= p - 1; ++j) {
            const double a = rec.coeffs[j - 1];
            const double b = closed.coeffs[j - 1];
            const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
            std::printf("%d,%s,%s,%s\n", j, csv_num(a).c_str(),
                        csv_num(b).c_str(), csv_num(rel).c_str());
        }
    }
    return 0;
}

/// The level-0 step size the run will use (what the manifest echoes).
double resolved_dt(const BoundConfig& bound) {
    if (!bound.dt_auto)
        return bound.spec.dt;
    auto prob = assemble_problem(bound.spec, 0);
    const AlphaTable alphas = alpha_recursive(bound.spec.p);
    const CflReport rep = verify_cfl(
        prob->ops, StepConfig{bound.spec.p, 0.0, bound.spec.safety}, alphas);
    return rep.dt_max;
}

/// Generic simulation: march to T, trace the energy, snapshot the end state.
int experiment_run(const BoundConfig& bound, double dt) {
    const ExperimentSpec& spec = bound.spec;
    auto prob = assemble_problem(spec, 0);
    const StepConfig cfg{spec.p, dt, spec.safety};
    const AlphaTable alphas = alpha_recursive(spec.p);
    const auto n_steps =
        static_cast<std::size_t>(std::max(1.0, std::ceil(spec.T / dt - 1e-9)));

    CsvWriter energy(spec.out_dir + "/energy.csv",
                     {"n", "t", "kinetic", "potential", "total", "l2_norm"});
    LtsWorkspace ws;
    SimState state = initial_step(prob->ops, cfg, prob->u0, prob->v0, {}, ws);
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (k > 0)
            lts_lf_step(prob->ops, cfg, state, {}, ws);
        const EnergyRecord e = discrete_energy(prob->ops, cfg, alphas, state, ws);
        energy.row({csv_int(static_cast<long long>(state.n)), csv_num(state.t),
                    csv_num(e.kinetic), csv_num(e.potential), csv_num(e.total),
                    csv_num(m_norm(prob->ops, state.u_curr))});
    }
    energy.close();
    write_vtk(spec.out_dir + "/solution_final.vtk", prob->mesh,
              std::vector<double>(state.u_curr.begin(),
                                  state.u_curr.begin() +
                                      static_cast<long>(prob->mesh.points.size())),
              "u");
    std::printf("steps = %zu\n", n_steps);
    std::printf("t_final = %s\n", csv_num(state.t).c_str());
    std::printf("l2_norm_final = %s\n",
                csv_num(m_norm(prob->ops, state.u_curr)).c_str());
    return 0;
}

int experiment_converge(const BoundConfig& bound) {
    const ConvergenceTable table = run_convergence(bound.spec, bound.mode);
    write_convergence_csv(table, bound.spec.out_dir + "/convergence.csv");
    for (const ConvergenceRow& row : table.rows)
        if (row.failed) {
            std::cerr << "converge: a level blew up before reaching T\n";
            return 1;
        }
    for (const ConvergenceRow& row : table.rows)
        std::printf("h=%-12.6g dt=%-12.6g l2=%-14.6e h1=%-14.6e rate=%.3f\n",
                    row.h, row.dt, row.l2_error, row.h1_error, row.rate);
    return 0;
}

int experiment_stability(const BoundConfig& bound) {
    ExperimentSpec spec = bound.spec;
    spec.safety = 1.0; // the sweep brackets the sharp limit
    spec.dt = 0.0;

    auto prob = assemble_problem(spec, 0);
    const AlphaTable alphas = alpha_recursive(spec.p);
    const CflReport rep =
        verify_cfl(prob->ops, StepConfig{spec.p, 0.0, 1.0}, alphas);

    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k)
        grid.push_back((0.5 + 0.1 * k) * rep.dt_max);
    const std::vector<StabilityPoint> sweep = run_stability_sweep(spec, grid);
    write_stability_csv(sweep, spec.out_dir + "/stability.csv");

    const double threshold =
        locate_stability_threshold(spec, 0.9 * rep.dt_max, 1.1 * rep.dt_max);
    std::printf("dt_max_spectral = %s\n", csv_num(rep.dt_max).c_str());
    std::printf("dt_max_empirical = %s\n", csv_num(threshold).c_str());
    std::printf("rel_deviation = %s\n",
                csv_num((threshold - rep.dt_max) / rep.dt_max).c_str());
    return 0;
}

int experiment_lshape(const BoundConfig& bound) {
    const LShapeResult res = run_lshape(bound.spec);
    std::printf("energy_drift = %s\n", csv_num(res.energy_drift).c_str());
    std::printf("rel_l2_vs_reference = %s\n",
                csv_num(res.rel_l2_vs_reference).c_str());
    std::printf("speedup = %s\n",
                csv_num(res.runtime.levels.at(0).speedup).c_str());
    return 0;
}

int experiment_bench(const BoundConfig& bound) {
    const RuntimeReport report =
        run_speedup_study(bound.spec, bound.spec.levels);
    write_runtime_csv(report, bound.spec.out_dir + "/runtime.csv");
    for (const RuntimeLevel& row : report.levels)
        std::printf("level %d: n=%zu speedup=%.3f predicted=%.3f\n", row.level,
                    row.n_total, row.speedup, row.predicted);
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg = parse_config_file(config_path);
    if (!out_override.empty())
        cfg.values["output.dir"] = out_override;
    const BoundConfig bound = bind_config(cfg, /*require_experiment=*/true);

    ensure_directory(bound.spec.out_dir);
    const double dt = resolved_dt(bound);
    write_manifest(bound.spec.out_dir + "/manifest.txt", bound, dt);

    if (bound.experiment == "run")
        return experiment_run(bound, dt);
    if (bound.experiment == "converge")
        return experiment_converge(bound);
    if (bound.experiment == "stability")
        return experiment_stability(bound);
    if (bound.experiment == "lshape")
        return experiment_lshape(bound);
    return experiment_bench(bound);
}

int cmd_verify(const std::string& config_path) {
    const RunConfig cfg = parse_config_file(config_path);
    const BoundConfig bound = bind_config(cfg, /*require_experiment=*/false);
    const ExperimentSpec& spec = bound.spec;

    auto prob = assemble_problem(spec, 0);
    const AlphaTable alphas = alpha_recursive(spec.p);

    const LambdaEstimate lam = estimate_lambda_max(
        [&](const NodalField& x, NodalField& y) { prob->ops.apply_op(x, y); },
        [&](const NodalField& x, NodalField& y) { prob->ops.apply_mass(x, y); },
        prob->ops.n);
    const CflReport rep = verify_cfl(
        prob->ops, StepConfig{spec.p, spec.dt, spec.safety}, alphas);

    std::printf("n_dofs = %zu\n", prob->dofs.n_dofs());
    std::printf("lambda_max_A = %s\n", csv_num(lam.value).c_str());
    std::printf("lambda_max_Asp = %s\n", csv_num(rep.lambda_max_asp).c_str());
    std::printf("dt_max = %s\n", csv_num(rep.dt_max).c_str());
    std::printf("ok = %s\n", rep.ok ? "true" : "false");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-element wave solver with local time-stepping"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "Worker thread cap (default 1)")
        ->check(CLI::PositiveNumber);

    int alpha_p = 0;
    std::string format = "csv";
    CLI::App* alpha = app.add_subcommand("alpha", "Print the coefficient table");
    alpha->add_option("-p,--p", alpha_p, "Sub-step count p (>= 1)")->required();
    alpha->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "text"}));

    std::string run_config, run_out;
    CLI::App* run = app.add_subcommand("run", "Execute a configured experiment");
    run->add_option("--config", run_config, "Configuration file")->required();
    run->add_option("--out", run_out, "Override output.dir");

    std::string verify_config;
    CLI::App* verify =
        app.add_subcommand("verify", "Report the spectral CFL bound");
    verify->add_option("--config", verify_config, "Configuration file")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message/help
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    ltswave::kernels::set_threads(threads);
    try {
        if (alpha->parsed()) {
            if (alpha_p < 1) {
                std::cerr << "alpha: p must be >= 1\n";
                return 2;
            }
            return cmd_alpha(alpha_p, format);
        }
        if (run->parsed())
            return cmd_run(run_config, run_out);
        if (verify->parsed())
            return cmd_verify(verify_config);
        return 2;
    } catch (const ltswave::BlowUpDetected& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (const ltswave::NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
