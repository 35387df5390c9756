#include <doctest.h>

#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/instances.hpp"
#include "fbopt/linalg.hpp"
#include "fbopt/linear_controller.hpp"
#include "fbopt/manifold.hpp"
#include "fbopt/place.hpp"
#include "fbopt/synthesis.hpp"

using namespace fbopt;

namespace {

struct LinearSetup {
    Problem prob;
    LinearizationData lin;
    ManifoldSolution manifold;
    Matrix K, L1, L2;
};

LinearSetup make_linear_setup() {
    Matrix A(2, 2);
    A << -1.0, 0.4, 0.0, -1.5;
    Matrix B(2, 1);
    B << 1.0, 0.3;
    Matrix P(2, 2);
    P << 0.8, 0.0, -0.1, 0.5;
    LinearSetup s{lq_problem(A, B, P, Matrix::Identity(2, 2), Matrix::Zero(2, 2), 0.2,
                             harmonic_exosystem({1.0}, {0.7})),
                  {},
                  {},
                  {},
                  {},
                  {}};
    s.lin = *s.prob.exact_linearization;
    FitOptions o;
    o.degree_pi = 1;
    o.degree_gamma = 1;
    o.collocation_per_basis = 20;
    o.trajectory_samples = 40;
    s.manifold = fit_manifold(s.prob, o);
    s.K = place_state_feedback(s.lin.A, s.lin.B, Interval{-3.0, -2.0});
    const Matrix L =
        place_observer_gain(s.lin.extendedA(), s.lin.extendedC(), Interval{-2.0, -1.0});
    s.L1 = L.topRows(2);
    s.L2 = L.bottomRows(2);
    return s;
}

}  // namespace

TEST_CASE("static law reduces to gamma on the manifold") {
    const LinearSetup s = make_linear_setup();
    const StaticLaw law = synthesize_static(s.prob, s.manifold, s.K);
    Vector w(2);
    w << 0.3, -0.1;
    const Vector on_manifold = law.Hc(s.manifold.pi_at(w), w);
    CHECK((on_manifold - s.manifold.gamma_at(w)).norm() < 1e-14);
    CHECK((law.Hc(s.prob.plant.x_eq, Vector::Zero(2)) - s.prob.plant.u_eq).norm() < 1e-12);
}

TEST_CASE("scalar static law matches the explicit formula") {
    // Scalar instance: Pi = 0, Gamma = [-1, 0] so u = -w1 + K x.
    const Problem prob = make_builtin("lq");
    FitOptions o;
    o.degree_pi = 1;
    o.degree_gamma = 1;
    o.collocation_per_basis = 30;
    const ManifoldSolution sol = fit_manifold(prob, o);
    Matrix K(1, 1);
    K << -1.0;
    const StaticLaw law = synthesize_static(prob, sol, K);
    Vector x(1), w(2);
    x << 0.4;
    w << 0.6, -0.2;
    CHECK(law.Hc(x, w)(0) == doctest::Approx(-w(0) + K(0, 0) * x(0)).epsilon(1e-9));
}

TEST_CASE("dynamic controller embeds an exact exosystem copy") {
    const LinearSetup s = make_linear_setup();
    const SynthesizedController ctrl =
        synthesize_dynamic(s.prob, s.manifold, s.K, s.L1, s.L2);
    CHECK(ctrl.nc == 4);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Vector z(4);
        for (int i = 0; i < 4; ++i) z(i) = g(rng);
        // Feed the controller its own predicted output so e_y = 0.
        const Vector y = s.prob.plant.c(z.head(2), z.tail(2));
        const Vector dz = ctrl.Fc(z, y);
        CHECK((dz.tail(2) - s.prob.exo.s(z.tail(2))).norm() < 1e-13);
    }
}

TEST_CASE("linear problems: Algorithm-1 controller equals the matrix assembly") {
    const LinearSetup s = make_linear_setup();
    const SynthesizedController ctrl =
        synthesize_dynamic(s.prob, s.manifold, s.K, s.L1, s.L2);
    const RegulatorSolution rs = solve_static_linear(s.lin);
    const LinearController lc =
        assemble_linear_controller(s.lin, rs.Pi, rs.Gamma, s.K, s.L1, s.L2);

    // G_c is linear: extract its matrix by probing unit vectors; same for F_c.
    const int nc = ctrl.nc;
    const int q = s.prob.plant.q;
    Matrix Cc(1, nc), Ac(nc, nc), Bc(nc, q);
    for (int j = 0; j < nc; ++j) {
        Vector e = Vector::Zero(nc);
        e(j) = 1.0;
        Cc.col(j) = ctrl.Gc(e);
        Ac.col(j) = ctrl.Fc(e, Vector::Zero(q));
    }
    for (int k = 0; k < q; ++k) {
        Vector ey = Vector::Zero(q);
        ey(k) = 1.0;
        Bc.col(k) = ctrl.Fc(Vector::Zero(nc), ey);
    }
    CHECK((Cc - lc.Cc).norm() < 1e-12 * (1 + lc.Cc.norm()));
    CHECK((Ac - lc.Ac).norm() < 1e-12 * (1 + lc.Ac.norm()));
    CHECK((Bc - lc.Bc).norm() < 1e-12 * (1 + lc.Bc.norm()));
}

TEST_CASE("equilibrium consistency for all controller kinds") {
    const LinearSetup s = make_linear_setup();
    const SynthesizedController dyn =
        synthesize_dynamic(s.prob, s.manifold, s.K, s.L1, s.L2);
    CHECK((dyn.Gc(dyn.z_eq) - s.prob.plant.u_eq).norm() < 1e-8);
    CHECK(dyn.Fc(dyn.z_eq, s.prob.plant.y_eq).norm() < 1e-8);

    const SynthesizedController base = baseline_gradient_flow(s.prob, 0.3);
    CHECK((base.Gc(base.z_eq) - s.prob.plant.u_eq).norm() < 1e-8);
    CHECK(base.Fc(base.z_eq, s.prob.plant.y_eq).norm() < 1e-8);
}

TEST_CASE("internal-model identities hold on samples for Algorithm-1 output") {
    const LinearSetup s = make_linear_setup();
    const SynthesizedController ctrl =
        synthesize_dynamic(s.prob, s.manifold, s.K, s.L1, s.L2);
    const auto samples = halton_box_samples(s.prob.exo.region, 200, 1);
    const InternalModelReport rep = verify_internal_model(ctrl, s.prob, samples);
    const double fit_res = std::max(s.manifold.report.validation_residual, 1e-12);
    CHECK(rep.max_residual_plant <= 10 * fit_res * (1 + s.manifold.report.f_scale) + 1e-9);
    CHECK(rep.max_residual_controller <=
          10 * fit_res * (1 + s.manifold.report.f_scale) + 1e-9);
    CHECK(rep.max_residual_gradient <=
          10 * fit_res * (1 + s.manifold.report.f_scale) + 1e-9);
    CHECK(rep.jacobian_check < 1e-6);

    SUBCASE("w = 0 sample gives zero residuals") {
        const InternalModelReport rep0 =
            verify_internal_model(ctrl, s.prob, {Vector::Zero(2)});
        CHECK(rep0.max_residual_plant < 1e-10);
        CHECK(rep0.max_residual_controller < 1e-10);
        CHECK(rep0.max_residual_gradient < 1e-10);
    }
}

TEST_CASE("baseline against a sinusoid violates the gradient identity") {
    const Problem prob = make_builtin("lq");  // harmonic exosystem, y = x
    const SynthesizedController base = baseline_gradient_flow(prob, 0.5);
    // sigma(w) for the baseline would need G_c(sigma(w)) = -w1; the gradient
    // identity residual |G_c(sigma) + w1| over samples cannot vanish because
    // dz = -eta(z + x)-type dynamics carry no oscillator. Check on the time
    // axis instead: the identity (27c) with sigma = (pi, w) from the exact
    // manifold fails for the baseline's G_c(z) = z independent of w.
    Vector w(2);
    w << 1.0, 0.0;
    const Vector u = base.Gc(Vector::Zero(1));
    const Vector g = reduced_gradient(prob.objective, u, w);
    CHECK(g.norm() > 0.5);
}

TEST_CASE("baseline requires the additive steady-state structure") {
    const Problem pend = make_builtin("pendulum-quadratic");
    CHECK_THROWS_AS(baseline_gradient_flow(pend, 0.1), UnsupportedProblem);

    const Problem ex5 = scalar_example5();  // unstable plant
    CHECK_THROWS_AS(baseline_gradient_flow(ex5, 0.1), PreconditionError);
}

TEST_CASE("eta = 0 freezes the baseline controller") {
    const Problem prob = make_builtin("lq");
    const SynthesizedController base = baseline_gradient_flow(prob, 0.0);
    Vector z(1), y(1);
    z << 0.7;
    y << -0.3;
    CHECK(base.Fc(z, y).norm() == 0.0);
    CHECK(base.Gc(z)(0) == 0.7);
}

TEST_CASE("non-Hurwitz K is rejected at synthesis") {
    const LinearSetup s = make_linear_setup();
    Matrix Kbad(1, 2);
    Kbad << 100.0, 100.0;  // destabilizes the plant
    if (eigendecompose(s.lin.A + s.lin.B * Kbad).max_real() >= 0)
        CHECK_THROWS_AS(synthesize_dynamic(s.prob, s.manifold, Kbad, s.L1, s.L2),
                        SynthesisError);
}
