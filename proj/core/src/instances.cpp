#include "fbopt/instances.hpp"

#include <cmath>

#include "fbopt/errors.hpp"

namespace fbopt {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sign_or(double v, double fallback) {
    if (v > 0) return 1.0;
    if (v < 0) return -1.0;
    return fallback >= 0 ? 1.0 : -1.0;
}

/// sqrt argument of the pendulum equilibrium branch.
double equilibrium_arg(const PendulumParams& pp, double u, double w1) {
    return pp.alpha() * pp.alpha() - pp.eta() * pp.eta() * w1 * w1 +
           pp.gamma() * pp.gamma() * u * u;
}

Vector pendulum_h_continuous(const PendulumParams& pp, double u, double w1) {
    const double arg = equilibrium_arg(pp, u, w1);
    if (arg < 0)
        throw DomainError("pendulum steady state: no real equilibrium at (u, w1) = (" +
                          std::to_string(u) + ", " + std::to_string(w1) + ")");
    const double tau = (pp.gamma() * u - pp.eta() * w1) / (pp.alpha() + std::sqrt(arg));
    Vector x(2);
    x << 2.0 * std::atan(tau), 0.0;
    return x;
}

/// Analytic d(h1)/du and d(h1)/dw1 on the continuous branch.
void pendulum_h_derivs(const PendulumParams& pp, double u, double w1, double* dh_du,
                       double* dh_dw1) {
    const double arg = equilibrium_arg(pp, u, w1);
    if (arg < 0) throw DomainError("pendulum steady state derivative: outside domain");
    const double s = std::sqrt(arg);
    const double den = pp.alpha() + s;
    const double num = pp.gamma() * u - pp.eta() * w1;
    const double tau = num / den;
    const double scale = 2.0 / (1.0 + tau * tau);
    const double ds_du = arg > 0 ? pp.gamma() * pp.gamma() * u / s : 0.0;
    const double ds_dw = arg > 0 ? -pp.eta() * pp.eta() * w1 / s : 0.0;
    *dh_du = scale * (pp.gamma() * den - num * ds_du) / (den * den);
    *dh_dw1 = scale * (-pp.eta() * den - num * ds_dw) / (den * den);
}

}  // namespace

PlantModel pendulum_plant(const PendulumParams& pp) {
    if (!pp.valid()) throw InvalidInput("pendulum_plant: parameters must be positive");
    PlantModel pl;
    pl.n = 2;
    pl.m = 1;
    pl.q = 1;
    pl.p = 4;
    pl.f = [pp](const Vector& x, const Vector& u, const Vector& w) {
        Vector dx(2);
        dx(0) = x(1);
        dx(1) = pp.alpha() * std::sin(x(0)) - pp.beta() * x(1) -
                pp.gamma() * u(0) * std::cos(x(0)) + pp.eta() * w(0);
        return dx;
    };
    pl.c = [](const Vector& x, const Vector& w) {
        return Vector::Constant(1, x(1) + w(2));
    };
    pl.dfdx = [pp](const Vector& x, const Vector& u, const Vector&) {
        Matrix J(2, 2);
        J << 0, 1, pp.alpha() * std::cos(x(0)) + pp.gamma() * u(0) * std::sin(x(0)), -pp.beta();
        return J;
    };
    pl.dfdu = [pp](const Vector& x, const Vector&, const Vector&) {
        Matrix J(2, 1);
        J << 0, -pp.gamma() * std::cos(x(0));
        return J;
    };
    pl.dfdw = [pp](const Vector&, const Vector&, const Vector&) {
        Matrix J = Matrix::Zero(2, 4);
        J(1, 0) = pp.eta();
        return J;
    };
    pl.dcdx = [](const Vector&, const Vector&) {
        Matrix J(1, 2);
        J << 0, 1;
        return J;
    };
    pl.dcdw = [](const Vector&, const Vector&) {
        Matrix J = Matrix::Zero(1, 4);
        J(0, 2) = 1;
        return J;
    };
    pl.x_eq = Vector::Zero(2);
    pl.u_eq = Vector::Zero(1);
    pl.y_eq = Vector::Zero(1);
    return pl;
}

Vector pendulum_steady_state(const PendulumParams& pp, const Vector& u, const Vector& w) {
    const double uu = u(0), w1 = w(0);
    const double arg = equilibrium_arg(pp, uu, w1);
    if (arg < 0)
        throw DomainError("pendulum_steady_state: no real equilibrium branch");
    const double denom = pp.eta() * w1 + pp.gamma() * uu;
    Vector x(2);
    if (denom == 0.0) {
        x << M_PI, 0.0;
        return x;
    }
    x << -2.0 * std::atan((pp.alpha() - std::sqrt(arg)) / denom), 0.0;
    return x;
}

Vector pendulum_steady_state_continuous(const PendulumParams& pp, const Vector& u,
                                        const Vector& w) {
    return pendulum_h_continuous(pp, u(0), w(0));
}

Exosystem harmonic_exosystem(const std::vector<double>& frequencies,
                             const std::vector<double>& amplitudes) {
    if (frequencies.empty() || frequencies.size() != amplitudes.size())
        throw InvalidInput("harmonic_exosystem: need one amplitude per frequency");
    const int nb = static_cast<int>(frequencies.size());
    Exosystem exo;
    exo.p = 2 * nb;
    Matrix S = Matrix::Zero(exo.p, exo.p);
    exo.w0 = Vector::Zero(exo.p);
    exo.region = Vector::Zero(exo.p);
    for (int i = 0; i < nb; ++i) {
        const double om = frequencies[static_cast<size_t>(i)];
        if (om <= 0) throw InvalidInput("harmonic_exosystem: frequencies must be positive");
        S(2 * i, 2 * i + 1) = 1.0;
        S(2 * i + 1, 2 * i) = -om * om;
        const double a = amplitudes[static_cast<size_t>(i)];
        exo.w0(2 * i) = a;
        exo.region(2 * i) = std::abs(a);
        exo.region(2 * i + 1) = std::abs(a) * om;
    }
    exo.S = S;
    exo.s = [S](const Vector& w) { return Vector(S * w); };
    return exo;
}

Exosystem constant_exosystem(const Vector& w0, const Vector& region) {
    Exosystem exo;
    exo.p = static_cast<int>(w0.size());
    exo.S = Matrix::Zero(exo.p, exo.p);
    exo.w0 = w0;
    exo.region = region;
    exo.s = [p = exo.p](const Vector&) { return Vector(Vector::Zero(p)); };
    return exo;
}

LqParts lq_parts(const Matrix& A, const Matrix& B, const Matrix& P, const Matrix& C,
                 const Matrix& Q, double lambda) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int q = static_cast<int>(C.rows());
    const int p = static_cast<int>(P.cols());
    if (A.cols() != n || B.rows() != n || P.rows() != n || C.cols() != n ||
        Q.rows() != q || Q.cols() != p || lambda < 0)
        throw InvalidInput("lq_parts: inconsistent dimensions");
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible())
        throw InvalidInput("lq_parts: A must be invertible for the steady-state map to exist");

    LqParts out;
    out.T_xu = -lu.solve(B);
    out.T_xw = -lu.solve(P);
    out.R = out.T_xu.transpose() * out.T_xu + lambda * Matrix::Identity(m, m);
    out.T = out.T_xu.transpose() * out.T_xw;

    PlantModel& pl = out.plant;
    pl.n = n;
    pl.m = m;
    pl.q = q;
    pl.p = p;
    pl.f = [A, B, P](const Vector& x, const Vector& u, const Vector& w) {
        return Vector(A * x + B * u + P * w);
    };
    pl.c = [C, Q](const Vector& x, const Vector& w) { return Vector(C * x + Q * w); };
    pl.dfdx = [A](const Vector&, const Vector&, const Vector&) { return A; };
    pl.dfdu = [B](const Vector&, const Vector&, const Vector&) { return B; };
    pl.dfdw = [P](const Vector&, const Vector&, const Vector&) { return P; };
    pl.dcdx = [C](const Vector&, const Vector&) { return C; };
    pl.dcdw = [Q](const Vector&, const Vector&) { return Q; };
    pl.x_eq = Vector::Zero(n);
    pl.u_eq = Vector::Zero(m);
    pl.y_eq = Vector::Zero(q);

    ObjectiveSpec& obj = out.objective;
    obj.loss = [lambda](const Vector& u, const Vector& x) {
        return 0.5 * x.squaredNorm() + 0.5 * lambda * u.squaredNorm();
    };
    obj.dloss_du = [lambda](const Vector& u, const Vector&) { return Vector(lambda * u); };
    obj.dloss_dx = [](const Vector&, const Vector& x) { return x; };
    obj.h = [Txu = out.T_xu, Txw = out.T_xw](const Vector& u, const Vector& w) {
        return Vector(Txu * u + Txw * w);
    };
    obj.dh_du = [Txu = out.T_xu](const Vector&, const Vector&) { return Txu; };
    obj.dh_dw = [Txw = out.T_xw](const Vector&, const Vector&) { return Txw; };
    obj.hhat = [Txu = out.T_xu](const Vector& u) { return Vector(Txu * u); };
    obj.dhhat_du = [Txu = out.T_xu](const Vector&) { return Txu; };
    return out;
}

Problem lq_problem(const Matrix& A, const Matrix& B, const Matrix& P, const Matrix& C,
                   const Matrix& Q, double lambda, Exosystem exo, const std::string& name) {
    if (exo.p != P.cols())
        throw InvalidInput("lq_problem: exosystem dimension must match P");
    LqParts parts = lq_parts(A, B, P, C, Q, lambda);
    Problem prob;
    prob.name = name;
    prob.plant = std::move(parts.plant);
    prob.objective = std::move(parts.objective);
    prob.exo = std::move(exo);
    LinearizationData lin;
    lin.A = A;
    lin.B = B;
    lin.C = C;
    lin.P = P;
    lin.Q = Q;
    lin.S = prob.exo.S;
    lin.T = parts.T;
    lin.R = parts.R;
    prob.exact_linearization = lin;
    return prob;
}

Problem scalar_example5() {
    Problem prob;
    prob.name = "example5";

    PlantModel& pl = prob.plant;
    pl.n = pl.m = pl.q = pl.p = 1;
    pl.f = [](const Vector& x, const Vector& u, const Vector&) {
        return Vector::Constant(1, x(0) + u(0));
    };
    pl.c = [](const Vector& x, const Vector& w) {
        return Vector::Constant(1, -2.0 * x(0) + w(0));
    };
    pl.dfdx = [](const Vector&, const Vector&, const Vector&) {
        return Matrix::Constant(1, 1, 1.0);
    };
    pl.dfdu = [](const Vector&, const Vector&, const Vector&) {
        return Matrix::Constant(1, 1, 1.0);
    };
    pl.dfdw = [](const Vector&, const Vector&, const Vector&) {
        return Matrix::Zero(1, 1);
    };
    pl.dcdx = [](const Vector&, const Vector&) { return Matrix::Constant(1, 1, -2.0); };
    pl.dcdw = [](const Vector&, const Vector&) { return Matrix::Constant(1, 1, 1.0); };
    pl.x_eq = Vector::Zero(1);
    pl.u_eq = Vector::Zero(1);
    pl.y_eq = Vector::Zero(1);

    prob.exo = constant_exosystem(Vector::Constant(1, 0.5), Vector::Constant(1, 1.0));

    ObjectiveSpec& obj = prob.objective;
    // The reduced problem is defined directly. The loss is written so that its
    // u-gradient really is g = u + w (the published display splits the square
    // but keeps this gradient).
    obj.reduced_loss_override = [](const Vector& u, const Vector& w) {
        const double s = u(0) + w(0);
        return 0.5 * s * s;
    };
    obj.reduced_gradient_override = [](const Vector& u, const Vector& w) {
        return Vector::Constant(1, u(0) + w(0));
    };
    // phi0 hook for the gradient-flow baseline; never authoritative here (the
    // reduced overrides are).
    obj.loss = [](const Vector& u, const Vector&) { return 0.5 * u(0) * u(0); };
    obj.dloss_du = [](const Vector& u, const Vector&) { return u; };
    obj.dloss_dx = [](const Vector&, const Vector& x) {
        return Vector(Vector::Zero(x.size()));
    };
    obj.h = [](const Vector& u, const Vector&) { return Vector::Constant(1, -u(0)); };
    obj.dh_du = [](const Vector&, const Vector&) { return Matrix::Constant(1, 1, -1.0); };
    obj.dh_dw = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
    obj.hhat = [](const Vector& u) { return Vector::Constant(1, -u(0)); };
    obj.dhhat_du = [](const Vector&) { return Matrix::Constant(1, 1, -1.0); };

    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, 1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Constant(1, 1, -2.0);
    lin.P = Matrix::Zero(1, 1);
    lin.Q = Matrix::Constant(1, 1, 1.0);
    lin.S = Matrix::Zero(1, 1);
    lin.T = Matrix::Constant(1, 1, 1.0);
    lin.R = Matrix::Constant(1, 1, 1.0);
    prob.exact_linearization = lin;
    return prob;
}

namespace {

/// Shared pendulum objective scaffolding: steady-state map on the continuous
/// branch plus a fitting guard that extends the gradient linearly past the
/// equilibrium-existence boundary.
void attach_pendulum_maps(ObjectiveSpec& obj, const PendulumParams& pp) {
    obj.h = [pp](const Vector& u, const Vector& w) {
        return pendulum_h_continuous(pp, u(0), w(0));
    };
    obj.dh_du = [pp](const Vector& u, const Vector& w) {
        double du, dw;
        pendulum_h_derivs(pp, u(0), w(0), &du, &dw);
        Matrix J = Matrix::Zero(2, 1);
        J(0, 0) = du;
        return J;
    };
    obj.dh_dw = [pp](const Vector& u, const Vector& w) {
        double du, dw;
        pendulum_h_derivs(pp, u(0), w(0), &du, &dw);
        Matrix J = Matrix::Zero(2, 4);
        J(0, 0) = dw;
        return J;
    };
}

void attach_pendulum_guard(ObjectiveSpec& obj, const PendulumParams& pp) {
    const ObjectiveSpec strict = obj;  // copy without the guard
    // Pull slope at the problem's own gradient scale; the boundary slope of
    // the true gradient is unbounded and would swamp a least-squares fit.
    const double pull =
        reduced_gradient(strict, Vector::Constant(1, 1e-4), Vector::Zero(4))(0) / 1e-4;
    obj.guarded_gradient = [strict, pp, pull](const Vector& u, const Vector& w) {
        const double eps0 = std::pow(1e-2 * pp.alpha(), 2);
        const double arg = equilibrium_arg(pp, u(0), w(0));
        if (arg >= eps0) return reduced_gradient(strict, u, w);
        // Evaluate on the shell arg = eps0 nearest to u and continue with a
        // bounded linear pull back toward the domain.
        const double target =
            std::sqrt((pp.eta() * pp.eta() * w(0) * w(0) - pp.alpha() * pp.alpha() + eps0)) /
            pp.gamma();
        const double side = sign_or(u(0), w(0));
        Vector up = u;
        up(0) = side * target;
        const Vector g0 = reduced_gradient(strict, up, w);
        return Vector(g0.array() + pull * (u(0) - up(0)));
    };
}

}  // namespace

Problem pendulum_quadratic_problem(const PendulumParams& pp,
                                   const std::vector<double>& frequencies,
                                   const std::vector<double>& amplitudes) {
    Problem prob;
    prob.name = "pendulum-quadratic";
    prob.plant = pendulum_plant(pp);
    prob.exo = harmonic_exosystem(frequencies, amplitudes);
    if (prob.exo.p != prob.plant.p)
        throw InvalidInput("pendulum_quadratic_problem: exosystem must have 4 states");

    ObjectiveSpec& obj = prob.objective;
    obj.loss = [](const Vector&, const Vector& x) { return 0.5 * x.squaredNorm(); };
    obj.dloss_du = [](const Vector& u, const Vector&) { return Vector(Vector::Zero(u.size())); };
    obj.dloss_dx = [](const Vector&, const Vector& x) { return x; };
    attach_pendulum_maps(obj, pp);
    attach_pendulum_guard(obj, pp);
    return prob;
}

Problem pendulum_logistic_problem(const PendulumParams& pp,
                                  const std::vector<double>& frequencies,
                                  const std::vector<double>& amplitudes, double kappa,
                                  double mu) {
    if (kappa <= 0 || mu <= 0)
        throw InvalidInput("pendulum_logistic_problem: kappa and mu must be positive");
    Problem prob;
    prob.name = "pendulum-logistic";
    prob.plant = pendulum_plant(pp);
    prob.exo = harmonic_exosystem(frequencies, amplitudes);
    if (prob.exo.p != prob.plant.p)
        throw InvalidInput("pendulum_logistic_problem: exosystem must have 4 states");

    ObjectiveSpec& obj = prob.objective;
    obj.loss = [kappa, mu](const Vector& u, const Vector& x) {
        return 0.5 * x.squaredNorm() +
               0.5 * kappa * (softplus(mu * u(0)) + softplus(-mu * u(0)));
    };
    obj.dloss_du = [kappa, mu](const Vector& u, const Vector&) {
        return Vector::Constant(1, 0.5 * kappa * mu * std::tanh(0.5 * mu * u(0)));
    };
    obj.dloss_dx = [](const Vector&, const Vector& x) { return x; };
    attach_pendulum_maps(obj, pp);
    attach_pendulum_guard(obj, pp);
    return prob;
}

Problem make_builtin(const std::string& name) {
    if (name == "example5") return scalar_example5();
    if (name == "lq") {
        Matrix A = Matrix::Constant(1, 1, -1.0);
        Matrix B = Matrix::Constant(1, 1, 1.0);
        Matrix P(1, 2);
        P << 1.0, 0.0;
        Matrix C = Matrix::Identity(1, 1);
        Matrix Q = Matrix::Zero(1, 2);
        return lq_problem(A, B, P, C, Q, 0.0, harmonic_exosystem({1.0}, {1.0}));
    }
    if (name == "pendulum-quadratic")
        return pendulum_quadratic_problem(PendulumParams{}, {1.0, 10.0}, {1.0, 0.5});
    if (name == "pendulum-logistic")
        return pendulum_logistic_problem(PendulumParams{}, {1.0, 10.0}, {1.0, 0.5}, 1.0, 0.5);
    throw InvalidInput("make_builtin: unknown instance '" + name + "'");
}

}  // namespace fbopt
