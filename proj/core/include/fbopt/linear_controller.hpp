#pragma once

#include "fbopt/regulator_eq.hpp"
#include "fbopt/types.hpp"

namespace fbopt {

/// Observer-based linear controller
///     dz = A_c z + B_c y,   u = C_c z,
/// assembled from gains (K, L1, L2) and a regulator solution (Pi, Gamma):
///     C_c = [K, Gamma - K Pi],   B_c = [L1; L2],
///     A_c = [[A + BK - L1 C,  P + B(Gamma - K Pi) - L1 Q],
///            [     -L2 C,              S - L2 Q        ]].
struct LinearController {
    Matrix Ac, Bc, Cc;
    Matrix K, L1, L2, Pi, Gamma;

    int nc() const { return static_cast<int>(Ac.rows()); }
};

/// Exact regulator solve for a linear-quadratic instance; delegates to
/// solve_regulator_linear on (A, B, P, S, R, T).
RegulatorSolution solve_static_linear(const LinearizationData& lin);

LinearController assemble_linear_controller(const LinearizationData& lin, const Matrix& Pi,
                                            const Matrix& Gamma, const Matrix& K,
                                            const Matrix& L1, const Matrix& L2);

/// Interconnection matrix [[A, B C_c], [B_c C, A_c]]; with
/// `include_exosystem` the marginal w-block [[P], [B_c Q]; S] is appended.
Matrix closed_loop_matrix(const LinearizationData& lin, const LinearController& ctrl,
                          bool include_exosystem = false);

/// Linear specialization of the gradient-flow baseline
///     dz = -eta (Lambda z + T_xu' y),   u = z,
/// with Lambda = R - T_xu' T_xu (the input regularization). Assumes full-state
/// output y = x and requires the plant to be pre-stabilized.
LinearController baseline_linear_gradient_controller(const LinearizationData& lin, double eta);

}  // namespace fbopt
