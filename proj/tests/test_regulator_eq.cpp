#include <doctest.h>

#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/regulator_eq.hpp"

using namespace fbopt;

namespace {

Matrix c1(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("scalar regulator instance solved by hand") {
    // A=-1, B=1, P=1, S=0, R=1, T=1: Gamma = -1 and Pi solves -Pi*0... i.e.
    // 0 = -Pi + Gamma + 1 => Pi = 0.
    const RegulatorSolution s =
        solve_regulator_linear(c1(-1), c1(1), c1(1), c1(0), c1(1), c1(1));
    CHECK(s.Gamma(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s.Pi(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(s.residual_sylvester < 1e-14);
    CHECK(s.residual_gradient < 1e-14);
    CHECK_FALSE(s.non_unique);
}

TEST_CASE("homogeneous system has the zero solution when spectra are disjoint") {
    const RegulatorSolution s =
        solve_regulator_linear(c1(-1), c1(1), c1(0), c1(0), c1(1), c1(0));
    CHECK(s.Pi.norm() == doctest::Approx(0.0));
    CHECK(s.Gamma.norm() == doctest::Approx(0.0));
}

TEST_CASE("substitute-back residuals stay tiny on random solvable instances") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int m = 1 + static_cast<int>(rng() % 3);
        const int p = 2 * (1 + static_cast<int>(rng() % 2));
        Matrix A = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) A(i, i) = -0.5 - 2.5 * (static_cast<double>(rng() % 1000) / 1000.0);
        Matrix V(n, n);
        for (int i = 0; i < n * n; ++i) V(i / n, i % n) = g(rng);
        const Eigen::HouseholderQR<Matrix> qr(V);
        const Matrix Qm = qr.householderQ();
        A = Qm * A * Qm.transpose();

        Matrix S = Matrix::Zero(p, p);
        for (int b = 0; b < p / 2; ++b) {
            const double om = 0.5 + static_cast<double>(rng() % 300) / 100.0;
            S(2 * b, 2 * b + 1) = 1;
            S(2 * b + 1, 2 * b) = -om * om;
        }
        Matrix B(n, m), P(n, p), T(m, p);
        for (int i = 0; i < n * m; ++i) B(i / m, i % m) = g(rng);
        for (int i = 0; i < n * p; ++i) P(i / p, i % p) = g(rng);
        for (int i = 0; i < m * p; ++i) T(i / p, i % p) = g(rng);
        Matrix R = Matrix::Identity(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) R(i, j) += 0.3 * g(rng) * (i == j ? 1 : 0.5);
        R = 0.5 * (R + R.transpose()) + m * Matrix::Identity(m, m);

        const RegulatorSolution s = solve_regulator_linear(A, B, P, S, R, T);
        const double scale = 1.0 + A.norm() + B.norm() + P.norm() + S.norm() + R.norm() + T.norm();
        CHECK((s.Pi * S - A * s.Pi - B * s.Gamma - P).norm() <= 1e-10 * scale);
        CHECK((R * s.Gamma + T).norm() <= 1e-10 * scale);
    }
}

TEST_CASE("singular-but-consistent gradient system returns minimum norm with flag") {
    // R = diag(1, 0), T = [1; 0]: Gamma = [-1; anything]; minimum norm picks 0.
    Matrix R = Matrix::Zero(2, 2);
    R(0, 0) = 1;
    Matrix T(2, 1);
    T << 1, 0;
    const RegulatorSolution s = solve_regulator_linear(
        -Matrix::Identity(1, 1), Matrix::Ones(1, 2), Matrix::Ones(1, 1),
        Matrix::Zero(1, 1), R, T);
    CHECK(s.non_unique);
    CHECK(s.Gamma(0, 0) == doctest::Approx(-1.0));
    CHECK(s.Gamma(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("inconsistent gradient system raises NoSolution") {
    Matrix R = Matrix::Zero(2, 2);
    R(0, 0) = 1;
    Matrix T(2, 1);
    T << 1, 1;  // second row demands 0 = -1
    CHECK_THROWS_AS(solve_regulator_linear(-Matrix::Identity(1, 1), Matrix::Ones(1, 2),
                                           Matrix::Ones(1, 1), Matrix::Zero(1, 1), R, T),
                    NoSolution);
}

TEST_CASE("resonant Sylvester operator with inconsistent data raises NoSolution") {
    // A and S share the eigenvalue 0 and the forcing is not in range.
    CHECK_THROWS_AS(
        solve_regulator_linear(c1(0), c1(0), c1(1), c1(0), c1(1), c1(0)),
        NoSolution);
}

TEST_CASE("dynamic tracking check: zero C_c with nonzero T cannot track") {
    // Plant A=-1, B=1, C=1, harmonic S; controller with C_c = 0.
    Matrix S(2, 2);
    S << 0, 1, -1, 0;
    Matrix P(1, 2);
    P << 1, 0;
    const DynamicTrackingCheck chk = verify_linear_dynamic_tracking(
        c1(-1), c1(1), c1(1), P, Matrix::Zero(1, 2), S, c1(-1), c1(1),
        Matrix::Zero(1, 1), c1(1), Matrix::Ones(1, 2));
    CHECK(chk.residual_plant < 1e-10);
    CHECK(chk.residual_controller < 1e-10);
    CHECK(chk.residual_gradient > 0.5);
    CHECK_FALSE(chk.exact_tracking);
}
