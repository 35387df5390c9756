#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fbopt/types.hpp"

namespace fbopt {

using PlantField = std::function<Vector(const Vector& x, const Vector& u, const Vector& w)>;
using OutputMap = std::function<Vector(const Vector& x, const Vector& w)>;

/// Nonlinear plant dx/dt = f(x, u, w), y = c(x, w) with an equilibrium anchor
/// (x_eq, u_eq, y_eq) satisfying f(x_eq, u_eq, 0) = 0 and y_eq = c(x_eq, 0).
/// Analytic Jacobian hooks are optional; finite differences fill the gaps.
struct PlantModel {
    int n{0}, m{0}, q{0}, p{0};
    PlantField f;
    OutputMap c;

    std::function<Matrix(const Vector&, const Vector&, const Vector&)> dfdx, dfdu, dfdw;
    std::function<Matrix(const Vector&, const Vector&)> dcdx, dcdw;

    Vector x_eq, u_eq, y_eq;
};

/// Disturbance generator dw/dt = s(w) with s(0) = 0 and marginal spectrum.
/// `region` is a box of half-widths bounding the trajectories of interest; it
/// stands in for the limit set when fitting regulator maps.
struct Exosystem {
    int p{0};
    std::function<Vector(const Vector&)> s;
    Matrix S;
    Vector region;
    Vector w0;
};

/// Loss phi0(u, x) together with the steady-state map h(u, w) that eliminates
/// the equilibrium constraint. The reduced loss is phi(u, w) = phi0(u, h(u, w))
/// unless `reduced_*_override` supplies the reduced form directly (used by
/// instances that define the reduced problem natively and by Lagrangian
/// augmentation).
struct ObjectiveSpec {
    std::function<double(const Vector& u, const Vector& x)> loss;
    std::function<Vector(const Vector& u, const Vector& x)> dloss_du;
    std::function<Vector(const Vector& u, const Vector& x)> dloss_dx;

    std::function<Vector(const Vector& u, const Vector& w)> h;
    std::function<Matrix(const Vector& u, const Vector& w)> dh_du;
    std::function<Matrix(const Vector& u, const Vector& w)> dh_dw;

    std::function<double(const Vector& u, const Vector& w)> reduced_loss_override;
    std::function<Vector(const Vector& u, const Vector& w)> reduced_gradient_override;

    /// Out-of-domain-tolerant gradient used only inside manifold fitting;
    /// falls back to the strict reduced gradient when unset.
    std::function<Vector(const Vector& u, const Vector& w)> guarded_gradient;

    /// Structure hook h(u, w) = hhat(u) + (additive w term), required by the
    /// gradient-flow baseline controller.
    std::function<Vector(const Vector& u)> hhat;
    std::function<Matrix(const Vector& u)> dhhat_du;
};

struct Problem {
    std::string name;
    PlantModel plant;
    Exosystem exo;
    ObjectiveSpec objective;
    std::optional<LinearizationData> exact_linearization;
};

double reduced_loss(const ObjectiveSpec& obj, const Vector& u, const Vector& w);

/// Chain rule g = grad_u phi0(u, h) + (dh/du)' grad_x phi0(u, h), or the
/// override when the instance defines the reduced problem directly.
Vector reduced_gradient(const ObjectiveSpec& obj, const Vector& u, const Vector& w);

/// Fitting-safe gradient: `guarded_gradient` when present, strict otherwise.
Vector guarded_reduced_gradient(const ObjectiveSpec& obj, const Vector& u, const Vector& w);

/// Central-difference Jacobian of a vector map; the step scales with the
/// argument norm to balance truncation against round-off.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& at,
                   double step_scale = 1e-6);

/// All Jacobians of (f, c, s, reduced gradient) at the given point by central
/// differences; analytic hooks are ignored so this doubles as their oracle.
LinearizationData finite_difference_jacobians(const Problem& prob, const Vector& x,
                                              const Vector& u, const Vector& w,
                                              double step_scale = 1e-6);

/// Linearization at the equilibrium anchor: analytic Jacobians and the exact
/// LQ data when available, finite differences otherwise.
LinearizationData linearize(const Problem& prob);

/// Equality constraint psi(u, w) = 0 for Lagrangian augmentation.
struct Constraint {
    std::function<double(const Vector& u, const Vector& w)> value;
    std::function<Vector(const Vector& u, const Vector& w)> grad_u;  // optional
};

/// Augmented objective over the extended decision variable (u, lambda): the
/// reduced loss becomes phi(u, w) + sum_i lambda_i psi_i(u, w) and the reduced
/// gradient stacks the Lagrangian stationarity rows with the constraint
/// values. With no constraints the objective is returned unchanged.
ObjectiveSpec lagrangian_augment(const ObjectiveSpec& obj, std::vector<Constraint> constraints,
                                 int input_dim);

}  // namespace fbopt
