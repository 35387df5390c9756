#include <doctest.h>

#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/place.hpp"

using namespace fbopt;

namespace {

Matrix random_stabilizable(std::mt19937_64& rng, int n, int m, Matrix* B_out) {
    std::normal_distribution<double> g;
    Matrix A(n, n), B(n, m);
    for (int i = 0; i < n * n; ++i) A(i / n, i % n) = g(rng);
    do {
        for (int i = 0; i < n * m; ++i) B(i / m, i % m) = g(rng);
    } while (!is_stabilizable(A, B));
    *B_out = B;
    return A;
}

}  // namespace

TEST_CASE("double integrator with poles {-1, -2} gives K = [-2, -3]") {
    // Oracle: match coefficients of det(sI - A - BK) = s^2 + 3s + 2 by hand.
    Matrix A(2, 2), B(2, 1);
    A << 0, 1, 0, 0;
    B << 0, 1;
    const Matrix K = place_state_feedback(A, B, Interval{-2.0, -1.0});
    CHECK(K(0, 0) == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(K(0, 1) == doctest::Approx(-3.0).epsilon(1e-10));
}

TEST_CASE("already-Hurwitz plant with covering region admits K = 0") {
    Matrix A(2, 2), B(2, 1);
    A << -1.5, 0, 0, -1.2;
    B << 1, 1;
    const Matrix K = place_state_feedback(A, B, Interval{-2.0, -1.0});
    CHECK(K.norm() == 0.0);
}

TEST_CASE("pendulum linearization lands in the requested interval") {
    const double alpha = 0.316 * 9.81 * 0.023 / 0.000444;
    const double beta = 0.1 * 0.023 * 0.023 / 0.000444;
    const double gamma = 0.316 * 0.023 / 0.000444;
    Matrix A(2, 2), B(2, 1);
    A << 0, 1, alpha, -beta;
    B << 0, -gamma;
    const Matrix K = place_state_feedback(A, B, Interval{-3.0, -2.0});
    const Spectrum sp = eigendecompose(A + B * K);
    for (const auto& ev : sp.eigenvalues) {
        CHECK(ev.real() <= -2.0 + 1e-6);
        CHECK(ev.real() >= -3.0 - 1e-6);
    }
}

TEST_CASE("state feedback is Hurwitz on random stabilizable pairs") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> ndist(1, 5), mdist(1, 3);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = ndist(rng), m = mdist(rng);
        Matrix B;
        const Matrix A = random_stabilizable(rng, n, m, &B);
        const Matrix K = place_state_feedback(A, B, Interval{-3.0, -2.0});
        CHECK(eigendecompose(A + B * K).max_real() < 0);
    }
}

TEST_CASE("unstabilizable pair raises SynthesisError") {
    Matrix A(2, 2), B(2, 1);
    A << 1, 0, 0, 1;
    B << 1, 0;
    CHECK_THROWS_AS(place_state_feedback(A, B, Interval{-2.0, -1.0}), SynthesisError);
}

TEST_CASE("observer gain mirrors state feedback through transposition") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> ndist(2, 4);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = ndist(rng);
        Matrix Ct;
        const Matrix At = random_stabilizable(rng, n, 1, &Ct);
        const Matrix A = At.transpose();
        const Matrix C = Ct.transpose();
        const Matrix L = place_observer_gain(A, C, Interval{-2.0, -1.0});
        CHECK(eigendecompose(A - L * C).max_real() < 0);
        // Duality: L equals the transposed dual state-feedback gain (up to the
        // sign forced by the A - LC convention).
        const Matrix Kdual = place_state_feedback(A.transpose(), C.transpose(),
                                                  Interval{-2.0, -1.0});
        CHECK((L + Kdual.transpose()).norm() < 1e-12);
    }
}

TEST_CASE("extended pendulum observer pair (n + p = 6) is placeable in [-2, -1]") {
    const double alpha = 0.316 * 9.81 * 0.023 / 0.000444;
    const double beta = 0.1 * 0.023 * 0.023 / 0.000444;
    const double eta = 1.0 / 0.000444;
    Matrix AL = Matrix::Zero(6, 6);
    AL(0, 1) = 1;
    AL(1, 0) = alpha;
    AL(1, 1) = -beta;
    AL(1, 2) = eta;  // P block: w1 drives the rate equation
    AL(2, 3) = 1;
    AL(3, 2) = -1.0;  // omega_x = 1
    AL(4, 5) = 1;
    AL(5, 4) = -100.0;  // omega_y = 10
    Matrix CL = Matrix::Zero(1, 6);
    CL(0, 1) = 1;
    CL(0, 4) = 1;
    const Matrix L = place_observer_gain(AL, CL, Interval{-2.0, -1.0});
    const Spectrum sp = eigendecompose(AL - L * CL);
    CHECK(sp.max_real() < 0);
    for (const auto& ev : sp.eigenvalues) {
        CHECK(ev.real() <= -1.0 + 1e-4);
        CHECK(ev.real() >= -2.0 - 1e-4);
    }
}

TEST_CASE("random detectable 4-state observer pair becomes Hurwitz") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix A(4, 4), C(2, 4);
        for (int i = 0; i < 16; ++i) A(i / 4, i % 4) = g(rng);
        for (int i = 0; i < 8; ++i) C(i / 4, i % 4) = g(rng);
        if (!is_detectable(C, A)) continue;
        const Matrix L = place_observer_gain(A, C, Interval{-2.0, -1.0});
        CHECK(eigendecompose(A - L * C).max_real() < 0);
    }
}

TEST_CASE("care solves a scalar Riccati equation exactly") {
    // a = 1, b = 1, q = 1, r = 1: p solves 2p - p^2 + 1 = 0, p = 1 + sqrt(2).
    const Matrix P = care(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0),
                          Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0));
    CHECK(P(0, 0) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-12));
}
