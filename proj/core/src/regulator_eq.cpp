#include "fbopt/regulator_eq.hpp"

#include <cmath>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"

namespace fbopt {

namespace {

struct LinearSolve {
    Vector x;
    bool rank_deficient{false};
};

/// Minimum-norm least-squares solve with an inconsistency check.
LinearSolve solve_or_throw(const Matrix& M, const Vector& rhs, const char* who) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
    LinearSolve out;
    out.x = cod.solve(rhs);
    out.rank_deficient = cod.rank() < std::min(M.rows(), M.cols());
    const double res = (M * out.x - rhs).norm();
    if (res > 1e-8 * (1.0 + rhs.norm() + M.norm()))
        throw NoSolution(std::string(who) + ": linear system is inconsistent, residual " +
                         std::to_string(res));
    return out;
}

}  // namespace

RegulatorSolution solve_regulator_linear(const Matrix& A, const Matrix& B,
                                         const Matrix& P, const Matrix& S,
                                         const Matrix& R, const Matrix& T) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int p = static_cast<int>(S.rows());
    if (A.cols() != n || B.rows() != n || P.rows() != n || P.cols() != p ||
        S.cols() != p || R.rows() != m || R.cols() != m || T.rows() != m || T.cols() != p)
        throw InvalidInput("solve_regulator_linear: inconsistent dimensions");

    RegulatorSolution sol;

    // Gradient identity R Gamma = -T, column by column via one decomposition.
    Eigen::CompleteOrthogonalDecomposition<Matrix> codR(R);
    sol.Gamma = codR.solve(-T);
    const bool r_deficient = codR.rank() < m;
    if ((R * sol.Gamma + T).norm() > 1e-8 * (1.0 + T.norm() + R.norm()))
        throw NoSolution("solve_regulator_linear: R Gamma = -T is inconsistent");

    // Sylvester equation Pi S - A Pi = B Gamma + P by Kronecker vectorization.
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Ip = Matrix::Identity(p, p);
    const Matrix op = kron(S.transpose(), In) - kron(Ip, A);
    const Matrix rhs_mat = B * sol.Gamma + P;
    const Vector rhs = Eigen::Map<const Vector>(rhs_mat.data(), rhs_mat.size());
    const LinearSolve piv = solve_or_throw(op, rhs, "solve_regulator_linear");
    sol.Pi = Eigen::Map<const Matrix>(piv.x.data(), n, p);
    sol.non_unique = r_deficient || piv.rank_deficient;

    sol.residual_sylvester = (sol.Pi * S - A * sol.Pi - B * sol.Gamma - P).norm();
    sol.residual_gradient = (R * sol.Gamma + T).norm();
    return sol;
}

DynamicTrackingCheck verify_linear_dynamic_tracking(
    const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& P,
    const Matrix& Q, const Matrix& S, const Matrix& Ac, const Matrix& Bc,
    const Matrix& Cc, const Matrix& R, const Matrix& T, double tol) {
    const int n = static_cast<int>(A.rows());
    const int p = static_cast<int>(S.rows());
    const int nc = static_cast<int>(Ac.rows());
    if (B.rows() != n || C.cols() != n || P.rows() != n || P.cols() != p ||
        Q.cols() != p || Bc.rows() != nc || Cc.cols() != nc || T.cols() != p)
        throw InvalidInput("verify_linear_dynamic_tracking: inconsistent dimensions");

    // Unknowns (Pi, Sigma) stacked as [vec(Pi); vec(Sigma)].
    const Matrix In = Matrix::Identity(n, n);
    const Matrix Inc = Matrix::Identity(nc, nc);
    const Matrix Ip = Matrix::Identity(p, p);

    Matrix op(n * p + nc * p, n * p + nc * p);
    op.topLeftCorner(n * p, n * p) = kron(S.transpose(), In) - kron(Ip, A);
    op.topRightCorner(n * p, nc * p) = -kron(Ip, B * Cc);
    op.bottomLeftCorner(nc * p, n * p) = -kron(Ip, Bc * C);
    op.bottomRightCorner(nc * p, nc * p) = kron(S.transpose(), Inc) - kron(Ip, Ac);

    Vector rhs(n * p + nc * p);
    const Matrix rhs_top = P;
    const Matrix rhs_bot = Bc * Q;
    rhs.head(n * p) = Eigen::Map<const Vector>(rhs_top.data(), rhs_top.size());
    rhs.tail(nc * p) = Eigen::Map<const Vector>(rhs_bot.data(), rhs_bot.size());

    const LinearSolve sv = solve_or_throw(op, rhs, "verify_linear_dynamic_tracking");

    DynamicTrackingCheck chk;
    chk.Pi = Eigen::Map<const Matrix>(sv.x.head(n * p).data(), n, p);
    chk.Sigma = Eigen::Map<const Matrix>(sv.x.tail(nc * p).data(), nc, p);
    chk.residual_plant = (chk.Pi * S - A * chk.Pi - B * Cc * chk.Sigma - P).norm();
    chk.residual_controller =
        (chk.Sigma * S - Ac * chk.Sigma - Bc * (C * chk.Pi + Q)).norm();
    chk.residual_gradient = (R * Cc * chk.Sigma + T).norm();
    chk.exact_tracking = chk.residual_plant < tol && chk.residual_controller < tol &&
                         chk.residual_gradient < tol;
    return chk;
}

}  // namespace fbopt
