#include "fbopt/model.hpp"

#include <cmath>

#include "fbopt/errors.hpp"

namespace fbopt {

double reduced_loss(const ObjectiveSpec& obj, const Vector& u, const Vector& w) {
    if (obj.reduced_loss_override) return obj.reduced_loss_override(u, w);
    if (!obj.loss || !obj.h) throw InvalidInput("reduced_loss: objective is incomplete");
    return obj.loss(u, obj.h(u, w));
}

Vector reduced_gradient(const ObjectiveSpec& obj, const Vector& u, const Vector& w) {
    if (obj.reduced_gradient_override) return obj.reduced_gradient_override(u, w);
    if (!obj.h) throw InvalidInput("reduced_gradient: objective has no steady-state map");
    const Vector x = obj.h(u, w);
    Matrix Ju;
    if (obj.dh_du) {
        Ju = obj.dh_du(u, w);
    } else {
        Ju = fd_jacobian([&](const Vector& uu) { return obj.h(uu, w); }, u);
    }
    Vector g1, g2;
    if (obj.dloss_du) {
        g1 = obj.dloss_du(u, x);
    } else {
        g1 = fd_jacobian([&](const Vector& uu) {
                 return Vector::Constant(1, obj.loss(uu, x));
             }, u).transpose();
    }
    if (obj.dloss_dx) {
        g2 = obj.dloss_dx(u, x);
    } else {
        g2 = fd_jacobian([&](const Vector& xx) {
                 return Vector::Constant(1, obj.loss(u, xx));
             }, x).transpose();
    }
    return g1 + Ju.transpose() * g2;
}

Vector guarded_reduced_gradient(const ObjectiveSpec& obj, const Vector& u, const Vector& w) {
    if (obj.guarded_gradient) return obj.guarded_gradient(u, w);
    return reduced_gradient(obj, u, w);
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& at,
                   double step_scale) {
    const double h = step_scale * (1.0 + at.norm());
    const int n = static_cast<int>(at.size());
    Matrix J;
    for (int j = 0; j < n; ++j) {
        Vector lo = at, hi = at;
        lo(j) -= h;
        hi(j) += h;
        const Vector flo = fn(lo), fhi = fn(hi);
        if (J.size() == 0) J.resize(flo.size(), n);
        J.col(j) = (fhi - flo) / (2.0 * h);
    }
    if (!J.allFinite()) throw NumericalFailure("fd_jacobian: non-finite difference quotient");
    return J;
}

LinearizationData finite_difference_jacobians(const Problem& prob, const Vector& x,
                                              const Vector& u, const Vector& w,
                                              double step_scale) {
    const auto& pl = prob.plant;
    LinearizationData lin;
    lin.A = fd_jacobian([&](const Vector& v) { return pl.f(v, u, w); }, x, step_scale);
    lin.B = fd_jacobian([&](const Vector& v) { return pl.f(x, v, w); }, u, step_scale);
    lin.P = fd_jacobian([&](const Vector& v) { return pl.f(x, u, v); }, w, step_scale);
    lin.C = fd_jacobian([&](const Vector& v) { return pl.c(v, w); }, x, step_scale);
    lin.Q = fd_jacobian([&](const Vector& v) { return pl.c(x, v); }, w, step_scale);
    lin.S = fd_jacobian([&](const Vector& v) { return prob.exo.s(v); }, w, step_scale);
    lin.T = fd_jacobian([&](const Vector& v) { return reduced_gradient(prob.objective, u, v); },
                        w, step_scale);
    lin.R = fd_jacobian([&](const Vector& v) { return reduced_gradient(prob.objective, v, w); },
                        u, step_scale);
    return lin;
}

LinearizationData linearize(const Problem& prob) {
    if (prob.exact_linearization) return *prob.exact_linearization;
    const auto& pl = prob.plant;
    const Vector x0 = pl.x_eq, u0 = pl.u_eq;
    const Vector w0 = Vector::Zero(prob.exo.p);

    LinearizationData lin = finite_difference_jacobians(prob, x0, u0, w0);
    if (pl.dfdx) lin.A = pl.dfdx(x0, u0, w0);
    if (pl.dfdu) lin.B = pl.dfdu(x0, u0, w0);
    if (pl.dfdw) lin.P = pl.dfdw(x0, u0, w0);
    if (pl.dcdx) lin.C = pl.dcdx(x0, w0);
    if (pl.dcdw) lin.Q = pl.dcdw(x0, w0);
    lin.S = prob.exo.S;
    return lin;
}

ObjectiveSpec lagrangian_augment(const ObjectiveSpec& obj, std::vector<Constraint> constraints,
                                 int input_dim) {
    if (constraints.empty()) return obj;
    const int m = input_dim;
    const int r = static_cast<int>(constraints.size());

    for (auto& c : constraints) {
        if (!c.value) throw InvalidInput("lagrangian_augment: constraint has no value map");
        if (!c.grad_u) {
            auto value = c.value;
            c.grad_u = [value](const Vector& u, const Vector& w) {
                return fd_jacobian(
                           [&](const Vector& uu) { return Vector::Constant(1, value(uu, w)); },
                           u)
                    .transpose()
                    .col(0);
            };
        }
    }

    ObjectiveSpec aug;
    aug.reduced_loss_override = [obj, constraints, m](const Vector& ut, const Vector& w) {
        const Vector u = ut.head(m);
        const Vector lam = ut.tail(ut.size() - m);
        double L = reduced_loss(obj, u, w);
        for (size_t i = 0; i < constraints.size(); ++i)
            L += lam(static_cast<Eigen::Index>(i)) * constraints[i].value(u, w);
        return L;
    };
    aug.reduced_gradient_override = [obj, constraints, m, r](const Vector& ut, const Vector& w) {
        const Vector u = ut.head(m);
        const Vector lam = ut.tail(r);
        Vector g(m + r);
        Vector gu = reduced_gradient(obj, u, w);
        for (int i = 0; i < r; ++i) {
            gu += lam(i) * constraints[static_cast<size_t>(i)].grad_u(u, w);
            g(m + i) = constraints[static_cast<size_t>(i)].value(u, w);
        }
        g.head(m) = gu;
        return g;
    };
    return aug;
}

}  // namespace fbopt
