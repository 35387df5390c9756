#include <benchmark/benchmark.h>

#include "fbopt/instances.hpp"
#include "fbopt/manifold.hpp"
#include "fbopt/poly.hpp"

using namespace fbopt;

namespace {

void BM_PolyBasisEval(benchmark::State& state) {
    const MonomialBasis basis(4, static_cast<int>(state.range(0)));
    Vector w(4);
    w << 0.3, -0.7, 0.1, 2.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(basis.eval(w));
    }
}
BENCHMARK(BM_PolyBasisEval)->Arg(2)->Arg(4)->Arg(6);

void BM_PolyBasisJacobian(benchmark::State& state) {
    const MonomialBasis basis(4, static_cast<int>(state.range(0)));
    Vector w(4);
    w << 0.3, -0.7, 0.1, 2.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(basis.jacobian(w));
    }
}
BENCHMARK(BM_PolyBasisJacobian)->Arg(2)->Arg(4);

void BM_InvarianceResidual(benchmark::State& state) {
    const Problem prob = make_builtin("pendulum-quadratic");
    FitOptions o;
    o.degree_pi = 2;
    o.degree_gamma = 2;
    o.collocation_per_basis = 10;
    o.trajectory_samples = 50;
    const ManifoldSolution sol = fit_manifold(prob, o);
    Vector w(4);
    w << 0.5, 0.2, -0.1, 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(invariance_residual(prob, sol, w));
    }
}
BENCHMARK(BM_InvarianceResidual);

void BM_FitManifoldLqDegree1(benchmark::State& state) {
    const Problem prob = make_builtin("lq");
    FitOptions o;
    o.degree_pi = 1;
    o.degree_gamma = 1;
    o.collocation_per_basis = 20;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_manifold(prob, o));
    }
}
BENCHMARK(BM_FitManifoldLqDegree1);

}  // namespace
