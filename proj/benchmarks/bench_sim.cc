#include <benchmark/benchmark.h>

#include "fbopt/instances.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/manifold.hpp"
#include "fbopt/place.hpp"
#include "fbopt/sim.hpp"
#include "fbopt/synthesis.hpp"

using namespace fbopt;

namespace {

struct PendulumLoop {
    Problem prob;
    SynthesizedController ctrl;
    Vector x0, z0;
};

const PendulumLoop& pendulum_loop() {
    static const PendulumLoop loop = [] {
        PendulumLoop out{make_builtin("pendulum-quadratic"), {}, {}, {}};
        const LinearizationData lin = linearize(out.prob);
        FitOptions o;
        o.degree_pi = 1;
        o.degree_gamma = 1;
        o.collocation_per_basis = 10;
        o.trajectory_samples = 50;
        const ManifoldSolution sol = fit_manifold(out.prob, o);
        const Matrix K = place_state_feedback(lin.A, lin.B, Interval{-3.0, -2.0});
        const Matrix L =
            place_observer_gain(lin.extendedA(), lin.extendedC(), Interval{-2.0, -1.0});
        out.ctrl = synthesize_dynamic(out.prob, sol, K, L.topRows(2), L.bottomRows(4));
        out.x0 = Vector::Zero(2);
        out.x0(0) = 0.002;
        out.z0 = Vector::Zero(6);
        out.z0.head(2) = out.x0;
        out.z0.tail(4) = out.prob.exo.w0;
        return out;
    }();
    return loop;
}

void BM_IntegrateFixedStep(benchmark::State& state) {
    const auto& pl = pendulum_loop();
    const ClosedLoop loop = ClosedLoop::output_feedback(pl.prob, pl.ctrl);
    IntegrateOptions opts;
    opts.step = 1e-3;
    opts.record_stride = 100;
    const double horizon = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(loop, pl.x0, pl.z0, horizon, opts));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<int64_t>(horizon / opts.step));
}
BENCHMARK(BM_IntegrateFixedStep)->Arg(1)->Arg(5);

void BM_IntegrateAdaptive(benchmark::State& state) {
    const auto& pl = pendulum_loop();
    const ClosedLoop loop = ClosedLoop::output_feedback(pl.prob, pl.ctrl);
    IntegrateOptions opts;
    opts.adaptive = true;
    opts.step = 1e-3;
    opts.record_stride = 100;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(loop, pl.x0, pl.z0, 1.0, opts));
    }
}
BENCHMARK(BM_IntegrateAdaptive);

}  // namespace
