#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace fbopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Closed interval of desired closed-loop pole real parts, lo <= hi < 0.
struct Interval {
    double lo{-2.0};
    double hi{-1.0};
};

/// Jacobian bundle of the interconnected plant/exosystem/objective at the
/// equilibrium anchor.  R is the reduced-loss Hessian in u and is only
/// populated for linear-quadratic problems or after finite differencing.
struct LinearizationData {
    Matrix A;  // n x n, d f / d x
    Matrix B;  // n x m, d f / d u
    Matrix C;  // q x n, d c / d x
    Matrix P;  // n x p, d f / d w
    Matrix Q;  // q x p, d c / d w
    Matrix S;  // p x p, d s / d w
    Matrix T;  // m x p, d (grad_u phi) / d w
    Matrix R;  // m x m, d (grad_u phi) / d u

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int q() const { return static_cast<int>(C.rows()); }
    int p() const { return static_cast<int>(S.rows()); }

    /// Extended pair used by the observer: A_L = [[A, P], [0, S]], C_L = [C, Q].
    Matrix extendedA() const;
    Matrix extendedC() const;
};

}  // namespace fbopt
