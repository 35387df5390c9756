#pragma once

#include "fbopt/types.hpp"

namespace fbopt {

/// Solution (Pi, Gamma) of the linear regulator equations
///     Pi S = A Pi + B Gamma + P,      0 = R Gamma + T,
/// with residuals recomputed from the raw inputs. `non_unique` is set when a
/// singular-but-consistent system was resolved to its minimum-norm solution.
struct RegulatorSolution {
    Matrix Pi;
    Matrix Gamma;
    double residual_sylvester{0};
    double residual_gradient{0};
    bool non_unique{false};
};

RegulatorSolution solve_regulator_linear(const Matrix& A, const Matrix& B,
                                         const Matrix& P, const Matrix& S,
                                         const Matrix& R, const Matrix& T);

/// Exactness check for a given linear controller (A_c, B_c, C_c): solves the
/// coupled equations
///     Pi S    = A Pi + B C_c Sigma + P,
///     Sigma S = A_c Sigma + B_c (C Pi + Q),
/// then reports the residual of the gradient identity R C_c Sigma + T = 0.
struct DynamicTrackingCheck {
    Matrix Pi;
    Matrix Sigma;
    double residual_plant{0};
    double residual_controller{0};
    double residual_gradient{0};
    bool exact_tracking{false};
};

DynamicTrackingCheck verify_linear_dynamic_tracking(
    const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& P,
    const Matrix& Q, const Matrix& S, const Matrix& Ac, const Matrix& Bc,
    const Matrix& Cc, const Matrix& R, const Matrix& T, double tol = 1e-9);

}  // namespace fbopt
