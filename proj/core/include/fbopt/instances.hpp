#pragma once

#include <string>
#include <vector>

#include "fbopt/model.hpp"

namespace fbopt {

/// Physical constants of the balancing-robot pendulum. Derived coefficients
/// are recomputed on every call so they can never go stale.
struct PendulumParams {
    double length{0.023};    // distance from center of gravity to pivot [m]
    double mass{0.316};      // [kg]
    double friction{0.1};    // [kg/s]
    double gravity{9.81};    // [m/s^2]
    double inertia{0.000444};  // moment of inertia about the pivot [kg m^2]

    double alpha() const { return mass * gravity * length / inertia; }
    double beta() const { return friction * length * length / inertia; }
    double gamma() const { return mass * length / inertia; }
    double eta() const { return 1.0 / inertia; }

    bool valid() const {
        return length > 0 && mass > 0 && friction > 0 && gravity > 0 && inertia > 0;
    }
};

/// Pendulum plant: x1 angle, x2 angular rate, scalar input u (cart
/// acceleration), 4-state exosystem with w1 the torque disturbance and w3 the
/// measurement disturbance:
///   dx1 = x2
///   dx2 = alpha sin x1 - beta x2 - gamma u cos x1 + eta w1
///   y   = x2 + w3
PlantModel pendulum_plant(const PendulumParams& params);

/// Closed-form equilibrium branch as published: [-2 atan((alpha - sqrt(arg)) /
/// (eta w1 + gamma u)), 0] with arg = alpha^2 - eta^2 w1^2 + gamma^2 u^2 when
/// eta w1 + gamma u != 0, and [pi, 0] otherwise. Throws DomainError when arg
/// is negative (no real equilibrium).
Vector pendulum_steady_state(const PendulumParams& params, const Vector& u, const Vector& w);

/// Same equilibrium family but on the branch continuous at (u, w) = (0, 0);
/// this is the C^1 selection used by the built-in pendulum problems.
Vector pendulum_steady_state_continuous(const PendulumParams& params, const Vector& u,
                                        const Vector& w);

/// Block-diagonal harmonic exosystem: one 2x2 block [[0, 1], [-w^2, 0]] per
/// frequency, initial state (a_i, 0) per block, region = trajectory box.
Exosystem harmonic_exosystem(const std::vector<double>& frequencies,
                             const std::vector<double>& amplitudes);

/// Integrator-type exosystem s(w) = 0 modelling constant disturbances.
Exosystem constant_exosystem(const Vector& w0, const Vector& region);

/// Linear plant dx = Ax + Bu + Pw, y = Cx + Qw with quadratic loss
/// (1/2)|x|^2 + (lambda/2)|u|^2. Requires A invertible so the steady-state
/// map h(u, w) = T_xu u + T_xw w exists, with T_xu = -A^{-1}B, T_xw = -A^{-1}P.
struct LqParts {
    PlantModel plant;
    ObjectiveSpec objective;
    Matrix T_xu, T_xw;
    Matrix R;  // T_xu' T_xu + lambda I
    Matrix T;  // T_xu' T_xw
};

LqParts lq_parts(const Matrix& A, const Matrix& B, const Matrix& P, const Matrix& C,
                 const Matrix& Q, double lambda);

Problem lq_problem(const Matrix& A, const Matrix& B, const Matrix& P, const Matrix& C,
                   const Matrix& Q, double lambda, Exosystem exo,
                   const std::string& name = "lq");

/// Scalar plant dx = x + u with output y = -2x + w, constant disturbance,
/// reduced loss (1/2)u^2 + (1/2)w^2 and gradient g = u + w.
Problem scalar_example5();

Problem pendulum_quadratic_problem(const PendulumParams& params,
                                   const std::vector<double>& frequencies,
                                   const std::vector<double>& amplitudes);

Problem pendulum_logistic_problem(const PendulumParams& params,
                                  const std::vector<double>& frequencies,
                                  const std::vector<double>& amplitudes, double kappa,
                                  double mu);

/// Built-in instances by name: "lq", "pendulum-quadratic", "pendulum-logistic",
/// "example5". Throws InvalidInput for unknown names.
Problem make_builtin(const std::string& name);

}  // namespace fbopt
