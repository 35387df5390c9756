#include "fbopt/synthesis.hpp"

#include <cmath>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"

namespace fbopt {

namespace {

void require_hurwitz_gains(const Problem& prob, const Matrix& K, const Matrix* L1,
                           const Matrix* L2) {
    const LinearizationData lin = linearize(prob);
    if (eigendecompose(lin.A + lin.B * K).max_real() >= 0)
        throw SynthesisError("synthesize: A + BK is not Hurwitz");
    if (L1 && L2) {
        Matrix L(lin.n() + lin.p(), lin.q());
        L << *L1, *L2;
        if (eigendecompose(lin.extendedA() - L * lin.extendedC()).max_real() >= 0)
            throw SynthesisError("synthesize: A_L - L C_L is not Hurwitz");
    }
}

}  // namespace

StaticLaw synthesize_static(const Problem& prob, const ManifoldSolution& manifold,
                            const Matrix& K) {
    if (K.rows() != prob.plant.m || K.cols() != prob.plant.n)
        throw InvalidInput("synthesize_static: K must be m x n");
    require_hurwitz_gains(prob, K, nullptr, nullptr);

    StaticLaw law;
    law.K = K;
    law.manifold = manifold;
    law.Hc = [manifold, K](const Vector& x, const Vector& w) {
        return Vector(manifold.gamma_at(w) + K * (x - manifold.pi_at(w)));
    };
    return law;
}

SynthesizedController synthesize_dynamic(const Problem& prob,
                                         const ManifoldSolution& manifold, const Matrix& K,
                                         const Matrix& L1, const Matrix& L2) {
    const int n = prob.plant.n, m = prob.plant.m, q = prob.plant.q, p = prob.exo.p;
    if (K.rows() != m || K.cols() != n || L1.rows() != n || L1.cols() != q ||
        L2.rows() != p || L2.cols() != q)
        throw InvalidInput("synthesize_dynamic: gain dimensions inconsistent");
    require_hurwitz_gains(prob, K, &L1, &L2);

    SynthesizedController ctrl;
    ctrl.kind = ControllerKind::Dynamic;
    ctrl.nc = n + p;
    ctrl.K = K;
    ctrl.L1 = L1;
    ctrl.L2 = L2;
    ctrl.manifold = manifold;
    ctrl.z_eq = Vector::Zero(n + p);
    ctrl.z_eq.head(n) = prob.plant.x_eq;

    const PlantModel plant = prob.plant;
    const auto s = prob.exo.s;
    ctrl.Gc = [manifold, K, n, p](const Vector& z) {
        const Vector z1 = z.head(n);
        const Vector z2 = z.tail(p);
        return Vector(manifold.gamma_at(z2) + K * (z1 - manifold.pi_at(z2)));
    };
    const auto Gc = ctrl.Gc;
    ctrl.Fc = [plant, s, Gc, L1, L2, n, p](const Vector& z, const Vector& y) {
        const Vector z1 = z.head(n);
        const Vector z2 = z.tail(p);
        const Vector ey = plant.c(z1, z2) - y;
        Vector dz(n + p);
        dz.head(n) = plant.f(z1, Gc(z), z2) - L1 * ey;
        dz.tail(p) = s(z2) - L2 * ey;
        return dz;
    };
    return ctrl;
}

InternalModelReport verify_internal_model(const SynthesizedController& ctrl,
                                          const Problem& prob,
                                          const std::vector<Vector>& samples) {
    if (ctrl.kind == ControllerKind::Baseline)
        throw InvalidInput("verify_internal_model: controller has no manifold");
    const int n = prob.plant.n, p = prob.exo.p;
    const ManifoldSolution& sol = ctrl.manifold;

    InternalModelReport rep;
    rep.samples = static_cast<int>(samples.size());
    for (const Vector& w : samples) {
        const Vector sw = prob.exo.s(w);
        const Vector piw = sol.pi_at(w);
        const Matrix dpi = sol.dpi_dw(w);

        Vector sigma(n + p);
        sigma.head(n) = piw;
        sigma.tail(p) = w;
        const Vector u = ctrl.Gc(sigma);
        const Vector y = prob.plant.c(piw, w);

        const double ra = (dpi * sw - prob.plant.f(piw, u, w)).norm();

        Vector dsigma_s(n + p);
        dsigma_s.head(n) = dpi * sw;
        dsigma_s.tail(p) = sw;
        const double rb = (dsigma_s - ctrl.Fc(sigma, y)).norm();

        double rc;
        try {
            rc = reduced_gradient(prob.objective, u, w).norm();
        } catch (const DomainError&) {
            ++rep.domain_violations;
            rc = guarded_reduced_gradient(prob.objective, u, w).norm();
        }

        const Matrix dpi_fd =
            fd_jacobian([&](const Vector& v) { return sol.pi_at(v); }, w, 1e-6);
        rep.jacobian_check =
            std::max(rep.jacobian_check, (dpi - dpi_fd).norm() / (1.0 + dpi.norm()));

        rep.max_residual_plant = std::max(rep.max_residual_plant, ra);
        rep.max_residual_controller = std::max(rep.max_residual_controller, rb);
        rep.max_residual_gradient = std::max(rep.max_residual_gradient, rc);
    }
    return rep;
}

SynthesizedController baseline_gradient_flow(const Problem& prob, double eta) {
    if (eta < 0) throw InvalidInput("baseline_gradient_flow: eta must be >= 0");
    const auto& obj = prob.objective;
    if (!obj.hhat || !obj.loss)
        throw UnsupportedProblem(
            "baseline_gradient_flow: problem does not expose h(u, w) = hhat(u) + w");
    if (eigendecompose(linearize(prob).A).max_real() >= 0)
        throw PreconditionError("baseline_gradient_flow: plant must be pre-stabilized");
    if (prob.plant.q != prob.plant.n)
        throw UnsupportedProblem("baseline_gradient_flow: assumes full-state output y = x");

    const int m = prob.plant.m;
    SynthesizedController ctrl;
    ctrl.kind = ControllerKind::Baseline;
    ctrl.nc = m;
    ctrl.z_eq = prob.plant.u_eq;
    ctrl.K = Matrix::Zero(m, prob.plant.n);
    ctrl.L1 = Matrix::Zero(prob.plant.n, prob.plant.q);
    ctrl.L2 = Matrix::Zero(prob.exo.p, prob.plant.q);
    ctrl.Gc = [](const Vector& z) { return z; };

    const ObjectiveSpec objective = prob.objective;
    ctrl.Fc = [objective, eta](const Vector& z, const Vector& y) {
        Vector g1;
        if (objective.dloss_du) {
            g1 = objective.dloss_du(z, y);
        } else {
            g1 = fd_jacobian([&](const Vector& u) {
                     return Vector::Constant(1, objective.loss(u, y));
                 }, z)
                     .transpose()
                     .col(0);
        }
        Vector g2;
        if (objective.dloss_dx) {
            g2 = objective.dloss_dx(z, y);
        } else {
            g2 = fd_jacobian([&](const Vector& x) {
                     return Vector::Constant(1, objective.loss(z, x));
                 }, y)
                     .transpose()
                     .col(0);
        }
        Matrix Jh;
        if (objective.dhhat_du) {
            Jh = objective.dhhat_du(z);
        } else {
            Jh = fd_jacobian([&](const Vector& u) { return objective.hhat(u); }, z);
        }
        return Vector(-eta * (g1 + Jh.transpose() * g2));
    };
    return ctrl;
}

}  // namespace fbopt
