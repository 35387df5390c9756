#include <benchmark/benchmark.h>

#include <random>

#include "fbopt/instances.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/place.hpp"
#include "fbopt/regulator_eq.hpp"

using namespace fbopt;

namespace {

Matrix random_hurwitz(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> uni(0.5, 3.0);
    Matrix D = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) D(i, i) = -uni(rng);
    Matrix V(n, n);
    do {
        for (int i = 0; i < n * n; ++i) V(i / n, i % n) = g(rng);
    } while (std::abs(V.determinant()) < 1e-3);
    return V * D * V.inverse();
}

void BM_RegulatorSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const Matrix A = random_hurwitz(rng, n);
    Matrix B(n, 1), P(n, 4), T(1, 4);
    for (int i = 0; i < n; ++i) B(i, 0) = g(rng);
    for (int i = 0; i < 4 * n; ++i) P(i / 4, i % 4) = g(rng);
    for (int i = 0; i < 4; ++i) T(0, i) = g(rng);
    Matrix S = Matrix::Zero(4, 4);
    S(0, 1) = 1;
    S(1, 0) = -1;
    S(2, 3) = 1;
    S(3, 2) = -100;
    const Matrix R = Matrix::Identity(1, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_regulator_linear(A, B, P, S, R, T));
    }
}
BENCHMARK(BM_RegulatorSolve)->Arg(2)->Arg(4)->Arg(8);

void BM_PlaceStateFeedback(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Matrix A(n, n), B(n, 2);
    for (int i = 0; i < n * n; ++i) A(i / n, i % n) = g(rng);
    do {
        for (int i = 0; i < 2 * n; ++i) B(i / 2, i % 2) = g(rng);
    } while (!is_stabilizable(A, B));
    for (auto _ : state) {
        benchmark::DoNotOptimize(place_state_feedback(A, B, Interval{-4.0, -2.0}));
    }
}
BENCHMARK(BM_PlaceStateFeedback)->Arg(2)->Arg(4)->Arg(6);

void BM_NecessaryConditions(benchmark::State& state) {
    const Problem prob = make_builtin("pendulum-quadratic");
    const LinearizationData lin = linearize(prob);
    for (auto _ : state) {
        benchmark::DoNotOptimize(check_necessary_conditions(lin));
    }
}
BENCHMARK(BM_NecessaryConditions);

}  // namespace
