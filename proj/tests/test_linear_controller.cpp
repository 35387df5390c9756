#include <doctest.h>

#include <algorithm>
#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/instances.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/linear_controller.hpp"
#include "fbopt/place.hpp"

using namespace fbopt;

namespace {

/// Random solvable LQ linearization with Hurwitz A and harmonic S.
LinearizationData random_lq_instance(std::mt19937_64& rng, int n, int m, int q, int p) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> uni(0.5, 3.0);
    Matrix D = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) D(i, i) = -uni(rng);
    Matrix V(n, n);
    do {
        for (int i = 0; i < n * n; ++i) V(i / n, i % n) = g(rng);
    } while (std::abs(V.determinant()) < 1e-3);
    const Matrix A = V * D * V.inverse();

    Matrix B(n, m), C(q, n), P(n, p), Q(q, p);
    for (int i = 0; i < n * m; ++i) B(i / m, i % m) = g(rng);
    for (int i = 0; i < q * n; ++i) C(i / n, i % n) = g(rng);
    for (int i = 0; i < n * p; ++i) P(i / p, i % p) = g(rng);
    for (int i = 0; i < q * p; ++i) Q(i / p, i % p) = g(rng);

    Matrix S = Matrix::Zero(p, p);
    for (int b = 0; b < p / 2; ++b) {
        const double om = uni(rng);
        S(2 * b, 2 * b + 1) = 1;
        S(2 * b + 1, 2 * b) = -om * om;
    }

    const LqParts parts = lq_parts(A, B, P, C, Q, 0.25);
    LinearizationData lin;
    lin.A = A;
    lin.B = B;
    lin.C = C;
    lin.P = P;
    lin.Q = Q;
    lin.S = S;
    lin.R = parts.R;
    lin.T = parts.T;
    return lin;
}

bool spectra_match(std::vector<Complex> a, std::vector<Complex> b, double tol) {
    if (a.size() != b.size()) return false;
    for (const Complex& ev : a) {
        double best = 1e300;
        size_t best_i = 0;
        for (size_t i = 0; i < b.size(); ++i) {
            const double d = std::abs(b[i] - ev);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        if (best > tol) return false;
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best_i));
    }
    return true;
}

}  // namespace

TEST_CASE("solve_static_linear on the scalar instance") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, -1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Identity(1, 1);
    lin.P = Matrix::Constant(1, 1, 1.0);
    lin.Q = Matrix::Zero(1, 1);
    lin.S = Matrix::Zero(1, 1);
    lin.R = Matrix::Constant(1, 1, 1.0);
    lin.T = Matrix::Constant(1, 1, 1.0);
    const RegulatorSolution s = solve_static_linear(lin);
    CHECK(s.Pi(0, 0) == doctest::Approx(0.0));
    CHECK(s.Gamma(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("trivial homogeneous case solves to zero") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, -2.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Identity(1, 1);
    lin.P = Matrix::Zero(1, 2);
    lin.Q = Matrix::Zero(1, 2);
    lin.S = Matrix::Zero(2, 2);
    lin.S(0, 1) = 1;
    lin.S(1, 0) = -1;
    lin.R = Matrix::Constant(1, 1, 2.0);
    lin.T = Matrix::Zero(1, 2);
    const RegulatorSolution s = solve_static_linear(lin);
    CHECK(s.Pi.norm() == 0.0);
    CHECK(s.Gamma.norm() == 0.0);
}

TEST_CASE("assembled controllers satisfy the coupled tracking identities") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        const int m = 1 + static_cast<int>(rng() % 2);
        const int q = 1 + static_cast<int>(rng() % 2);
        const int p = 2;
        const LinearizationData lin = random_lq_instance(rng, n, m, q, p);
        const RegulatorSolution rs = solve_static_linear(lin);
        const Matrix K = place_state_feedback(lin.A, lin.B, Interval{-3.0, -2.0});
        const Matrix L = place_observer_gain(lin.extendedA(), lin.extendedC(),
                                             Interval{-2.0, -1.0});
        const LinearController ctrl = assemble_linear_controller(
            lin, rs.Pi, rs.Gamma, K, L.topRows(n), L.bottomRows(p));

        CHECK((ctrl.Cc.leftCols(n) - K).norm() == 0.0);
        CHECK((ctrl.Cc.rightCols(p) - (rs.Gamma - K * rs.Pi)).norm() == 0.0);

        const DynamicTrackingCheck chk = verify_linear_dynamic_tracking(
            lin.A, lin.B, lin.C, lin.P, lin.Q, lin.S, ctrl.Ac, ctrl.Bc, ctrl.Cc,
            lin.R, lin.T);
        CHECK(chk.residual_gradient < 1e-9 * (1.0 + lin.T.norm()));
        CHECK(chk.exact_tracking);

        // Sigma has the structure [Pi; I] from sigma(w) = (pi(w), w).
        CHECK((chk.Sigma.topRows(n) - rs.Pi).norm() < 1e-7 * (1 + rs.Pi.norm()));
        CHECK((chk.Sigma.bottomRows(p) - Matrix::Identity(p, p)).norm() < 1e-7);
    }
}

TEST_CASE("closed-loop spectrum separates into feedback and observer parts") {
    auto eigvec_cond = [](const Matrix& M) {
        Eigen::EigenSolver<Matrix> es(M);
        Eigen::JacobiSVD<ComplexMatrix> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        return sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : 1e300;
    };
    std::mt19937_64 rng(202);
    int checked = 0;
    for (int trial = 0; trial < 300 && checked < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const int m = 1 + static_cast<int>(rng() % 2);
        const int q = 1 + static_cast<int>(rng() % 2);
        const int p = 2 * (1 + static_cast<int>(rng() % 2));
        const LinearizationData lin = random_lq_instance(rng, n, m, q, p);
        const RegulatorSolution rs = solve_static_linear(lin);
        const Matrix K = place_state_feedback(lin.A, lin.B, Interval{-4.0, -2.0});
        const Matrix L = place_observer_gain(lin.extendedA(), lin.extendedC(),
                                             Interval{-9.0, -5.0});
        // Skip draws whose spectra are too ill-conditioned for an absolute
        // 1e-8 eigenvalue comparison (huge gains, clustered poles, or
        // near-parallel eigenvectors).
        if (K.cwiseAbs().maxCoeff() > 300 || L.cwiseAbs().maxCoeff() > 300) continue;
        const LinearController ctrl = assemble_linear_controller(
            lin, rs.Pi, rs.Gamma, K, L.topRows(n), L.bottomRows(p));

        const Matrix M = closed_loop_matrix(lin, ctrl);
        const Matrix Afb = lin.A + lin.B * K;
        const Matrix Aobs = lin.extendedA() - ctrl.Bc * lin.extendedC();
        std::vector<Complex> expect = eigendecompose(Afb).eigenvalues;
        const auto obs = eigendecompose(Aobs).eigenvalues;
        expect.insert(expect.end(), obs.begin(), obs.end());
        double min_gap = 1e300;
        for (size_t i = 0; i < expect.size(); ++i)
            for (size_t j = i + 1; j < expect.size(); ++j)
                min_gap = std::min(min_gap, std::abs(expect[i] - expect[j]));
        if (min_gap < 1e-2 || eigvec_cond(Afb) > 2e5 || eigvec_cond(Aobs) > 2e5 ||
            eigvec_cond(M) > 2e5)
            continue;
        CHECK(spectra_match(eigendecompose(M).eigenvalues, expect, 1e-8));
        ++checked;
    }
    CHECK(checked >= 15);
}

TEST_CASE("scalar sanity case: stabilized zero plant") {
    LinearizationData lin;
    lin.A = Matrix::Zero(1, 1);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Identity(1, 1);
    lin.P = Matrix::Constant(1, 1, 1.0);
    lin.Q = Matrix::Zero(1, 1);
    lin.S = Matrix::Zero(1, 1);
    lin.R = Matrix::Constant(1, 1, 1.0);
    lin.T = Matrix::Constant(1, 1, 1.0);
    const RegulatorSolution rs = solve_static_linear(lin);
    const Matrix K = place_state_feedback(lin.A, lin.B, Interval{-2.0, -2.0});
    const Matrix L =
        place_observer_gain(lin.extendedA(), lin.extendedC(), Interval{-1.5, -1.0});
    const LinearController ctrl =
        assemble_linear_controller(lin, rs.Pi, rs.Gamma, K, L.topRows(1), L.bottomRows(1));
    CHECK(eigendecompose(closed_loop_matrix(lin, ctrl)).max_real() < 0);
}

TEST_CASE("non-Hurwitz gains are rejected") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, 1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Identity(1, 1);
    lin.P = Matrix::Zero(1, 1);
    lin.Q = Matrix::Zero(1, 1);
    lin.S = Matrix::Zero(1, 1);
    lin.R = Matrix::Constant(1, 1, 1.0);
    lin.T = Matrix::Zero(1, 1);
    const Matrix K = Matrix::Zero(1, 1);  // leaves A = 1 unstable
    CHECK_THROWS_AS(assemble_linear_controller(lin, Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                               K, Matrix::Ones(1, 1), Matrix::Ones(1, 1)),
                    SynthesisError);
}

TEST_CASE("baseline controller: constant disturbance tracks, sinusoid cannot") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, -1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Identity(1, 1);
    lin.R = Matrix::Constant(1, 1, 1.0);

    SUBCASE("constant disturbance: identities solvable with zero residual") {
        lin.P = Matrix::Constant(1, 1, 1.0);
        lin.Q = Matrix::Zero(1, 1);
        lin.S = Matrix::Zero(1, 1);
        lin.T = Matrix::Constant(1, 1, 1.0);
        const LinearController base = baseline_linear_gradient_controller(lin, 0.2);
        const DynamicTrackingCheck chk = verify_linear_dynamic_tracking(
            lin.A, lin.B, lin.C, lin.P, lin.Q, lin.S, base.Ac, base.Bc, base.Cc, lin.R,
            lin.T);
        CHECK(chk.residual_gradient < 1e-10);
        CHECK(chk.exact_tracking);
    }

    SUBCASE("sinusoidal disturbance: gradient identity residual bounded away from 0") {
        lin.P = Matrix::Zero(1, 2);
        lin.P(0, 0) = 1.0;
        lin.Q = Matrix::Zero(1, 2);
        Matrix S(2, 2);
        S << 0, 1, -1, 0;
        lin.S = S;
        lin.T = Matrix::Zero(1, 2);
        lin.T(0, 0) = 1.0;
        for (double eta : {0.01, 0.1, 1.0}) {
            const LinearController base = baseline_linear_gradient_controller(lin, eta);
            const DynamicTrackingCheck chk = verify_linear_dynamic_tracking(
                lin.A, lin.B, lin.C, lin.P, lin.Q, lin.S, base.Ac, base.Bc, base.Cc,
                lin.R, lin.T);
            CHECK(chk.residual_gradient > 0.05);
            CHECK_FALSE(chk.exact_tracking);
        }
    }

    SUBCASE("unstable plant is refused") {
        lin.A = Matrix::Constant(1, 1, 0.5);
        lin.P = Matrix::Constant(1, 1, 1.0);
        lin.Q = Matrix::Zero(1, 1);
        lin.S = Matrix::Zero(1, 1);
        lin.T = Matrix::Constant(1, 1, 1.0);
        CHECK_THROWS_AS(baseline_linear_gradient_controller(lin, 0.1), PreconditionError);
    }

    SUBCASE("eta -> 0 leaves a near-marginal controller pole") {
        lin.P = Matrix::Constant(1, 1, 1.0);
        lin.Q = Matrix::Zero(1, 1);
        lin.S = Matrix::Zero(1, 1);
        lin.T = Matrix::Constant(1, 1, 1.0);
        const double eta = 1e-9;
        const LinearController base = baseline_linear_gradient_controller(lin, eta);
        // Controller pole at -eta * Lambda; Lambda = R - T_xu'T_xu = 0 here, so
        // the pole sits at 0 exactly and counts as marginal.
        const Spectrum sp = eigendecompose(base.Ac);
        CHECK(sp.marginal_count == 1);
    }
}
