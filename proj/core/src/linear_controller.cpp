#include "fbopt/linear_controller.hpp"

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"

namespace fbopt {

RegulatorSolution solve_static_linear(const LinearizationData& lin) {
    if (lin.R.size() == 0 || lin.T.size() == 0)
        throw InvalidInput("solve_static_linear: linearization lacks R or T");
    return solve_regulator_linear(lin.A, lin.B, lin.P, lin.S, lin.R, lin.T);
}

LinearController assemble_linear_controller(const LinearizationData& lin, const Matrix& Pi,
                                            const Matrix& Gamma, const Matrix& K,
                                            const Matrix& L1, const Matrix& L2) {
    const int n = lin.n(), m = lin.m(), q = lin.q(), p = lin.p();
    if (K.rows() != m || K.cols() != n || L1.rows() != n || L1.cols() != q ||
        L2.rows() != p || L2.cols() != q || Pi.rows() != n || Pi.cols() != p ||
        Gamma.rows() != m || Gamma.cols() != p)
        throw InvalidInput("assemble_linear_controller: inconsistent dimensions");

    if (eigendecompose(lin.A + lin.B * K).max_real() >= 0)
        throw SynthesisError("assemble_linear_controller: A + BK is not Hurwitz");
    Matrix L(n + p, q);
    L << L1, L2;
    if (eigendecompose(lin.extendedA() - L * lin.extendedC()).max_real() >= 0)
        throw SynthesisError("assemble_linear_controller: A_L - L C_L is not Hurwitz");

    LinearController ctrl;
    ctrl.K = K;
    ctrl.L1 = L1;
    ctrl.L2 = L2;
    ctrl.Pi = Pi;
    ctrl.Gamma = Gamma;

    const Matrix GmKP = Gamma - K * Pi;
    ctrl.Cc.resize(m, n + p);
    ctrl.Cc << K, GmKP;
    ctrl.Bc = L;
    ctrl.Ac.resize(n + p, n + p);
    ctrl.Ac.topLeftCorner(n, n) = lin.A + lin.B * K - L1 * lin.C;
    ctrl.Ac.topRightCorner(n, p) = lin.P + lin.B * GmKP - L1 * lin.Q;
    ctrl.Ac.bottomLeftCorner(p, n) = -L2 * lin.C;
    ctrl.Ac.bottomRightCorner(p, p) = lin.S - L2 * lin.Q;
    return ctrl;
}

Matrix closed_loop_matrix(const LinearizationData& lin, const LinearController& ctrl,
                          bool include_exosystem) {
    const int n = lin.n(), p = lin.p();
    const int nc = ctrl.nc();
    const int total = n + nc + (include_exosystem ? p : 0);
    Matrix M = Matrix::Zero(total, total);
    M.topLeftCorner(n, n) = lin.A;
    M.block(0, n, n, nc) = lin.B * ctrl.Cc;
    M.block(n, 0, nc, n) = ctrl.Bc * lin.C;
    M.block(n, n, nc, nc) = ctrl.Ac;
    if (include_exosystem) {
        M.block(0, n + nc, n, p) = lin.P;
        M.block(n, n + nc, nc, p) = ctrl.Bc * lin.Q;
        M.block(n + nc, n + nc, p, p) = lin.S;
    }
    return M;
}

LinearController baseline_linear_gradient_controller(const LinearizationData& lin, double eta) {
    const int n = lin.n(), m = lin.m();
    if (eta < 0) throw InvalidInput("baseline_linear_gradient_controller: eta must be >= 0");
    if (lin.R.size() == 0)
        throw InvalidInput("baseline_linear_gradient_controller: linearization lacks R");
    if (eigendecompose(lin.A).max_real() >= 0)
        throw PreconditionError(
            "baseline_linear_gradient_controller: plant must be pre-stabilized (A Hurwitz)");
    if (lin.q() != n)
        throw UnsupportedProblem(
            "baseline_linear_gradient_controller: assumes full-state output y = x");

    Eigen::FullPivLU<Matrix> lu(lin.A);
    const Matrix Txu = -lu.solve(lin.B);
    const Matrix Lambda = lin.R - Txu.transpose() * Txu;

    LinearController ctrl;
    ctrl.Ac = -eta * Lambda;
    ctrl.Bc = -eta * Txu.transpose();
    ctrl.Cc = Matrix::Identity(m, m);
    ctrl.K = Matrix::Zero(m, n);
    ctrl.L1 = Matrix::Zero(n, lin.q());
    ctrl.L2 = Matrix::Zero(lin.p(), lin.q());
    ctrl.Pi = Matrix::Zero(n, lin.p());
    ctrl.Gamma = Matrix::Zero(m, lin.p());
    return ctrl;
}

}  // namespace fbopt
