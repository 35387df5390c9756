#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/linear_controller.hpp"
#include "fbopt/place.hpp"
#include "fbopt/serialize.hpp"
#include "fbopt/sim.hpp"
#include "fbopt/synthesis.hpp"
#include "svg.hpp"

namespace fbopt::tool {

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

std::string matrix_line(const Matrix& M) {
    std::ostringstream os;
    os << M.format(Eigen::IOFormat(9, 0, " ", "; ", "", "", "[", "]"));
    return os.str();
}

struct SynthesisResult {
    ManifoldSolution manifold;
    Matrix K, L1, L2;
    SynthesizedController controller;
};

SynthesisResult run_synthesis(const Scenario& sc, const Problem& prob) {
    SynthesisResult out;
    FitOptions fo = sc.fit;
    fo.seed = sc.seed;
    out.manifold = fit_manifold(prob, fo);
    const LinearizationData lin = linearize(prob);
    out.K = place_state_feedback(lin.A, lin.B, sc.feedback_region);
    const Matrix L =
        place_observer_gain(lin.extendedA(), lin.extendedC(), sc.observer_region);
    out.L1 = L.topRows(lin.n());
    out.L2 = L.bottomRows(lin.p());
    out.controller = synthesize_dynamic(prob, out.manifold, out.K, out.L1, out.L2);
    return out;
}

Trajectory run_simulation(const Scenario& sc, const Problem& prob,
                          const SynthesizedController& ctrl,
                          const ManifoldSolution& manifold) {
    const int n = prob.plant.n, p = prob.exo.p;
    Vector x0;
    if (!sc.x0.empty()) {
        x0 = Eigen::Map<const Vector>(sc.x0.data(), static_cast<Eigen::Index>(sc.x0.size()));
    } else if (sc.start == "manifold") {
        x0 = manifold.pi_at(prob.exo.w0);
    } else {
        x0 = prob.plant.x_eq;
    }
    Vector z0;
    if (!sc.z0.empty()) {
        z0 = Eigen::Map<const Vector>(sc.z0.data(), static_cast<Eigen::Index>(sc.z0.size()));
    } else {
        // Controller state starts at the plant's initial state and the
        // exosystem initial condition.
        z0 = Vector::Zero(n + p);
        z0.head(n) = x0;
        z0.tail(p) = prob.exo.w0;
    }
    if (x0.size() != n || z0.size() != ctrl.nc)
        throw InvalidInput("simulate: sim.x0 / sim.z0 have the wrong dimensions");

    IntegrateOptions opts;
    opts.step = sc.step;
    opts.record_stride = sc.record_stride;
    return integrate(ClosedLoop::output_feedback(prob, ctrl), x0, z0, sc.horizon, opts);
}

void write_plots(const RunContext& ctx, const Trajectory& traj, const std::string& hash) {
    auto series_of = [&traj](const Matrix& M, const char* base) {
        std::vector<SvgSeries> out;
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            SvgSeries s;
            s.label = std::string(base) + std::to_string(j + 1);
            s.t = traj.t;
            s.v.resize(static_cast<size_t>(M.rows()));
            for (Eigen::Index i = 0; i < M.rows(); ++i)
                s.v[static_cast<size_t>(i)] = M(i, j);
            out.push_back(std::move(s));
        }
        return out;
    };
    const std::string note = "<!-- scenario_hash " + hash + " -->\n";
    atomic_write_file(join_path(ctx.out_dir, "traj_w.svg"),
                      note + line_plot_svg("disturbance w(t)", series_of(traj.w, "w")));
    atomic_write_file(join_path(ctx.out_dir, "traj_u.svg"),
                      note + line_plot_svg("input u(t)", series_of(traj.u, "u")));
    atomic_write_file(join_path(ctx.out_dir, "traj_g.svg"),
                      note + line_plot_svg("gradient signal g(t)", series_of(traj.g, "g")));
    atomic_write_file(join_path(ctx.out_dir, "traj_x.svg"),
                      note + line_plot_svg("state x(t)", series_of(traj.x, "x")));
}

void write_metrics_report(const RunContext& ctx, const Trajectory& traj,
                          const TrackingMetrics& m, const std::string& hash) {
    std::ostringstream os;
    os << "scenario_hash " << hash << "\n";
    os << "samples " << traj.samples() << "\n";
    os << "diverged " << (traj.diverged ? 1 : 0) << "\n";
    os << "tail_sup_g " << m.tail_sup_g << "\n";
    os << "settled " << (m.settled ? 1 : 0) << "\n";
    os << "tail_has_nan " << (m.tail_has_nan ? 1 : 0) << "\n";
    if (m.rate_reported) os << "rate_fit " << m.rate_fit << "\n";
    os << "state_tail " << m.state_tail << "\n";
    os << "--- resolved scenario ---\n" << scenario_to_text(ctx.scenario);
    atomic_write_file(join_path(ctx.out_dir, "metrics.txt"), os.str());
}

}  // namespace

int cmd_check(const RunContext& ctx) {
    const Problem prob = build_problem(ctx.scenario);
    const LinearizationData lin = linearize(prob);
    const NecessaryConditionsReport rep = check_necessary_conditions(lin);
    std::printf("problem: %s\n", ctx.scenario.problem.c_str());
    std::printf("  (A,B) stabilizable:        %s\n", rep.stabilizable ? "yes" : "NO");
    std::printf("  (C,A) detectable:          %s\n", rep.detectable_plant ? "yes" : "NO");
    std::printf("  (C_L,A_L) detectable:      %s\n", rep.detectable_extended ? "yes" : "NO");
    std::printf("  unobservable/unstable modes inside ker[0 T]: %s\n",
                rep.inclusion_holds ? "yes" : "NO");
    for (const auto& w : rep.witnesses) std::printf("  witness: %s\n", w.c_str());
    std::printf("necessary conditions: %s\n", rep.all_pass() ? "PASS" : "FAIL");
    return rep.all_pass() ? kExitOk : kExitSynthesisFailure;
}

int cmd_solve_linear(const RunContext& ctx) {
    const Problem prob = build_problem(ctx.scenario);
    const LinearizationData lin = linearize(prob);
    const RegulatorSolution sol = solve_static_linear(lin);
    std::printf("Pi    = %s\n", matrix_line(sol.Pi).c_str());
    std::printf("Gamma = %s\n", matrix_line(sol.Gamma).c_str());
    std::printf("residual (flow identity)     = %.3e\n", sol.residual_sylvester);
    std::printf("residual (gradient identity) = %.3e\n", sol.residual_gradient);
    if (sol.non_unique) std::printf("note: solution is minimum-norm (non-unique)\n");

    Bundle b;
    b.set_scalar("kind", std::string("regulator-solution"));
    b.set_scalar("scenario_hash", scenario_hash(ctx.scenario));
    b.set_scalar("residual_sylvester", sol.residual_sylvester);
    b.set_scalar("residual_gradient", sol.residual_gradient);
    b.set_scalar("non_unique", sol.non_unique ? 1 : 0);
    b.matrices["Pi"] = sol.Pi;
    b.matrices["Gamma"] = sol.Gamma;
    atomic_write_file(join_path(ctx.out_dir, "linear_solution.txt"), b.to_text());
    return kExitOk;
}

int cmd_fit_manifold(const RunContext& ctx) {
    const Problem prob = build_problem(ctx.scenario);
    FitOptions fo = ctx.scenario.fit;
    fo.seed = ctx.scenario.seed;
    const ManifoldSolution sol = fit_manifold(prob, fo);
    std::printf("fit: degrees (%d, %d), %d collocation points, %d iterations\n",
                sol.pi.degree(), sol.gamma.degree(), sol.report.collocation_count,
                sol.report.iterations);
    std::printf("training residual   = %.3e\n", sol.report.training_residual);
    std::printf("validation residual = %.3e  (%d fresh points, %d domain violations)\n",
                sol.report.validation_residual, sol.report.validation_count,
                sol.report.domain_violations);
    Bundle b = manifold_to_bundle(sol);
    b.set_scalar("scenario_hash", scenario_hash(ctx.scenario));
    atomic_write_file(join_path(ctx.out_dir, "manifold.txt"), b.to_text());
    return kExitOk;
}

int cmd_synthesize(const RunContext& ctx) {
    const Problem prob = build_problem(ctx.scenario);
    const SynthesisResult syn = run_synthesis(ctx.scenario, prob);
    const std::string hash = scenario_hash(ctx.scenario);
    const Bundle b = controller_to_bundle(syn.K, syn.L1, syn.L2, syn.manifold, hash);
    atomic_write_file(join_path(ctx.out_dir, "controller.txt"), b.to_text());
    std::printf("controller written to %s\n",
                join_path(ctx.out_dir, "controller.txt").c_str());
    std::printf("K  = %s\n", matrix_line(syn.K).c_str());
    std::printf("fit validation residual = %.3e\n",
                syn.manifold.report.validation_residual);
    return kExitOk;
}

int cmd_simulate(const RunContext& ctx, const std::string& bundle_path) {
    const Problem prob = build_problem(ctx.scenario);
    const std::string hash = scenario_hash(ctx.scenario);

    SynthesizedController ctrl;
    ManifoldSolution manifold;
    if (!bundle_path.empty()) {
        const Bundle b = Bundle::from_text(read_file(bundle_path));
        if (b.get_string("kind") != "dynamic-controller")
            throw InvalidInput("simulate: bundle is not a dynamic controller");
        if (b.get_string("scenario_hash") != hash && !ctx.force)
            throw InvalidInput(
                "simulate: bundle scenario hash mismatch (pass --force to override)");
        manifold = manifold_from_bundle(b);
        ctrl = synthesize_dynamic(prob, manifold, b.get_matrix("K"), b.get_matrix("L1"),
                                  b.get_matrix("L2"));
    } else {
        const SynthesisResult syn = run_synthesis(ctx.scenario, prob);
        manifold = syn.manifold;
        ctrl = syn.controller;
    }

    const Trajectory traj = run_simulation(ctx.scenario, prob, ctrl, manifold);
    const TrackingMetrics m = metrics(traj, ctx.scenario.settle_tol, &manifold);

    atomic_write_file(join_path(ctx.out_dir, "trajectory.csv"),
                      "# scenario_hash " + hash + "\n" + trajectory_to_csv(traj));
    write_metrics_report(ctx, traj, m, hash);
    write_plots(ctx, traj, hash);

    std::printf("samples %d, tail sup |g| = %.3e, settled = %s%s\n", traj.samples(),
                m.tail_sup_g, m.settled ? "yes" : "no",
                traj.diverged ? " [DIVERGED]" : "");
    return traj.diverged ? kExitDiverged : kExitOk;
}

int cmd_compare_baseline(const RunContext& ctx, const std::vector<double>& etas) {
    const Problem prob = build_problem(ctx.scenario);
    const Scenario& sc = ctx.scenario;

    IntegrateOptions opts;
    opts.step = sc.step;
    opts.record_stride = sc.record_stride;

    std::ostringstream table;
    table << "controller        eta      tail_sup_g    settled\n";

    const SynthesisResult syn = run_synthesis(sc, prob);
    const Trajectory tim = run_simulation(sc, prob, syn.controller, syn.manifold);
    const TrackingMetrics mim = metrics(tim, sc.settle_tol, &syn.manifold);
    char line[128];
    std::snprintf(line, sizeof(line), "internal-model    -        %.6e  %s\n",
                  mim.tail_sup_g, mim.settled ? "yes" : "no");
    table << line;

    for (double eta : etas) {
        const SynthesizedController base = baseline_gradient_flow(prob, eta);
        const Trajectory tb = integrate(ClosedLoop::output_feedback(prob, base),
                                        prob.plant.x_eq, base.z_eq, sc.horizon, opts);
        const TrackingMetrics mb = metrics(tb, sc.settle_tol);
        std::snprintf(line, sizeof(line), "gradient-flow     %-8.3g %.6e  %s\n", eta,
                      mb.tail_sup_g, mb.settled ? "yes" : "no");
        table << line;
    }

    const std::string hash = scenario_hash(sc);
    atomic_write_file(join_path(ctx.out_dir, "comparison.txt"),
                      "scenario_hash " + hash + "\n" + table.str());
    std::printf("%s", table.str().c_str());
    return kExitOk;
}

int cmd_bench(const RunContext& ctx) {
    std::printf("== bench %s ==\n", ctx.scenario.problem.c_str());
    const int check_rc = cmd_check(ctx);
    if (check_rc != kExitOk) return check_rc;
    const int syn_rc = cmd_synthesize(ctx);
    if (syn_rc != kExitOk) return syn_rc;
    return cmd_simulate(ctx, join_path(ctx.out_dir, "controller.txt"));
}

}  // namespace fbopt::tool
