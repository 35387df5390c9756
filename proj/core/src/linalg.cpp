#include "fbopt/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "fbopt/errors.hpp"

extern "C" {
// LAPACK: reorder the real Schur factorization so that the selected cluster of
// eigenvalues appears in the leading block of T (and the leading columns of Q
// span the corresponding invariant subspace).
void dtrsen_(const char* job, const char* compq, const int* select, const int* n,
             double* t, const int* ldt, double* q, const int* ldq,
             double* wr, double* wi, int* m, double* s, double* sep,
             double* work, const int* lwork, int* iwork, const int* liwork, int* info);
}

namespace fbopt {

namespace {

void require_square(const Matrix& M, const char* who) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw InvalidInput(std::string(who) + ": matrix must be square and nonempty");
    if (!M.allFinite())
        throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
}

/// Leading-columns invariant-subspace basis via reordered real Schur form.
/// `select_ge` keeps eigenvalues with real part >= -margin when true, the
/// complement otherwise.
Matrix schur_invariant_basis(const Matrix& M, double margin, bool select_ge) {
    const int n = static_cast<int>(M.rows());
    Eigen::RealSchur<Matrix> schur(M);
    if (schur.info() != Eigen::Success)
        throw NumericalFailure("schur_invariant_basis: real Schur iteration failed");

    Matrix T = schur.matrixT();
    Matrix Q = schur.matrixU();

    // Eigenvalue real parts per diagonal position (2x2 blocks share one).
    std::vector<int> select(n, 0);
    int i = 0;
    while (i < n) {
        const bool pair = (i + 1 < n) && (std::abs(T(i + 1, i)) > 0.0);
        const double re = pair ? 0.5 * (T(i, i) + T(i + 1, i + 1)) : T(i, i);
        const bool ge = re >= -margin;
        const int keep = (ge == select_ge) ? 1 : 0;
        select[i] = keep;
        if (pair) {
            select[i + 1] = keep;
            i += 2;
        } else {
            i += 1;
        }
    }

    std::vector<double> wr(n), wi(n);
    int m_out = 0, info = 0;
    double s = 0.0, sep = 0.0;
    const int lwork = std::max(1, n * n);
    const int liwork = std::max(1, n * n);
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dtrsen_("N", "V", select.data(), &n, T.data(), &n, Q.data(), &n,
            wr.data(), wi.data(), &m_out, &s, &sep, work.data(), &lwork,
            iwork.data(), &liwork, &info);
    if (info != 0)
        throw NumericalFailure("schur_invariant_basis: dtrsen failed, info=" + std::to_string(info));
    return Q.leftCols(m_out);
}

}  // namespace

Matrix LinearizationData::extendedA() const {
    const int nn = n(), pp = p();
    Matrix AL = Matrix::Zero(nn + pp, nn + pp);
    AL.topLeftCorner(nn, nn) = A;
    AL.topRightCorner(nn, pp) = P;
    AL.bottomRightCorner(pp, pp) = S;
    return AL;
}

Matrix LinearizationData::extendedC() const {
    Matrix CL(q(), n() + p());
    CL << C, Q;
    return CL;
}

double Spectrum::max_real() const {
    double r = -std::numeric_limits<double>::infinity();
    for (const auto& ev : eigenvalues) r = std::max(r, ev.real());
    return r;
}

Spectrum eigendecompose(const Matrix& M, double margin) {
    require_square(M, "eigendecompose");
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NumericalFailure("eigendecompose: eigenvalue iteration did not converge");

    Spectrum sp;
    sp.eigenvalues.reserve(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const Complex ev = es.eigenvalues()(i);
        sp.eigenvalues.push_back(ev);
        if (ev.real() < -margin)
            ++sp.stable_count;
        else if (ev.real() <= margin)
            ++sp.marginal_count;
        else
            ++sp.unstable_count;
    }
    return sp;
}

SubspaceBasis unstable_subspace(const Matrix& M, double margin) {
    require_square(M, "unstable_subspace");
    return SubspaceBasis{schur_invariant_basis(M, margin, true), SubspaceKind::Unstable};
}

SubspaceBasis stable_subspace(const Matrix& M, double margin) {
    require_square(M, "stable_subspace");
    return SubspaceBasis{schur_invariant_basis(M, margin, false), SubspaceKind::Stable};
}

SubspaceBasis controllable_subspace(const Matrix& A, const Matrix& B, double tol) {
    require_square(A, "controllable_subspace");
    if (B.rows() != A.rows())
        throw InvalidInput("controllable_subspace: B row count must match A");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    Matrix K(n, n * m);
    Matrix block = B;
    for (int i = 0; i < n; ++i) {
        // Normalize each power block so large ||A|| does not mask low ranks.
        Matrix nb = block;
        const double s = nb.norm();
        if (s > 0) nb /= s;
        K.middleCols(i * m, m) = nb;
        block = A * block;
    }
    return SubspaceBasis{range_basis(K, tol), SubspaceKind::Controllable};
}

SubspaceBasis unobservable_subspace(const Matrix& C, const Matrix& A, double tol) {
    require_square(A, "unobservable_subspace");
    if (C.cols() != A.rows())
        throw InvalidInput("unobservable_subspace: C column count must match A");
    const int n = static_cast<int>(A.rows());
    const int q = static_cast<int>(C.rows());
    Matrix O(n * q, n);
    Matrix block = C;
    for (int i = 0; i < n; ++i) {
        Matrix nb = block;
        const double s = nb.norm();
        if (s > 0) nb /= s;
        O.middleRows(i * q, q) = nb;
        block = block * A;
    }
    return SubspaceBasis{kernel_basis(O, tol), SubspaceKind::Unobservable};
}

namespace {

/// PBH rank of [A - lambda I, B] for one eigenvalue.
bool pbh_full_rank(const Matrix& A, const Matrix& B, const Complex& lambda, double tol) {
    const int n = static_cast<int>(A.rows());
    ComplexMatrix M(n, n + B.cols());
    M.leftCols(n) = A.cast<Complex>() - lambda * ComplexMatrix::Identity(n, n);
    M.rightCols(B.cols()) = B.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(M);
    const auto& sv = svd.singularValues();
    const double thresh = tol * std::max(1.0, sv(0));
    return sv(sv.size() - 1) > thresh;
}

}  // namespace

bool is_stabilizable(const Matrix& A, const Matrix& B, double margin) {
    require_square(A, "is_stabilizable");
    if (B.rows() != A.rows())
        throw InvalidInput("is_stabilizable: B row count must match A");
    const Spectrum sp = eigendecompose(A, margin);
    for (const auto& ev : sp.eigenvalues) {
        if (ev.real() < -margin) continue;
        if (!pbh_full_rank(A, B, ev, kRankTol)) return false;
    }
    return true;
}

bool is_detectable(const Matrix& C, const Matrix& A, double margin) {
    return is_stabilizable(A.transpose(), C.transpose(), margin);
}

NecessaryConditionsReport check_necessary_conditions(const LinearizationData& lin, double tol) {
    const int n = lin.n(), m = lin.m(), q = lin.q(), p = lin.p();
    if (lin.A.rows() != n || lin.B.rows() != n || lin.C.cols() != n ||
        lin.P.rows() != n || lin.P.cols() != p || lin.Q.rows() != q ||
        lin.Q.cols() != p || lin.T.rows() != m || lin.T.cols() != p)
        throw InvalidInput("check_necessary_conditions: inconsistent dimensions");

    NecessaryConditionsReport rep;
    rep.stabilizable = is_stabilizable(lin.A, lin.B);
    if (!rep.stabilizable) {
        const Spectrum sp = eigendecompose(lin.A);
        for (const auto& ev : sp.eigenvalues) {
            if (ev.real() >= -kStableMargin && !pbh_full_rank(lin.A, lin.B, ev, tol)) {
                rep.witnesses.push_back("stabilizability fails at eigenvalue (" +
                                        std::to_string(ev.real()) + ", " +
                                        std::to_string(ev.imag()) + "i)");
                break;
            }
        }
    }

    rep.detectable_plant = is_detectable(lin.C, lin.A);
    if (!rep.detectable_plant) {
        const Spectrum sp = eigendecompose(lin.A);
        for (const auto& ev : sp.eigenvalues) {
            if (ev.real() >= -kStableMargin &&
                !pbh_full_rank(lin.A.transpose(), lin.C.transpose(), ev, tol)) {
                rep.witnesses.push_back("plant detectability fails at eigenvalue (" +
                                        std::to_string(ev.real()) + ", " +
                                        std::to_string(ev.imag()) + "i)");
                break;
            }
        }
    }

    const Matrix AL = lin.extendedA();
    const Matrix CL = lin.extendedC();
    rep.detectable_extended = is_detectable(CL, AL);

    if (rep.detectable_extended) {
        // The unobservable/unstable intersection is trivial, so the inclusion
        // holds with no further computation.
        rep.inclusion_holds = true;
        return rep;
    }

    const Matrix unobs = unobservable_subspace(CL, AL, tol).columns;
    const Matrix unst = unstable_subspace(AL).columns;
    const Matrix inter = subspace_intersection(unobs, unst, tol);
    if (inter.cols() == 0) {
        rep.inclusion_holds = true;
        return rep;
    }

    // ker [0_{m x n}  T]: append the intersection basis to a kernel basis and
    // compare ranks.
    Matrix ZT(m, n + p);
    ZT.leftCols(n).setZero();
    ZT.rightCols(p) = lin.T;
    const Matrix ker = kernel_basis(ZT, tol);
    Matrix stacked(n + p, ker.cols() + inter.cols());
    stacked << ker, inter;
    rep.inclusion_holds = numerical_rank(stacked, tol) == numerical_rank(ker, tol);
    if (!rep.inclusion_holds) {
        // Any intersection vector with a nonzero image under [0 T] is a witness.
        for (Eigen::Index j = 0; j < inter.cols(); ++j) {
            if ((ZT * inter.col(j)).norm() > tol) {
                std::string dir = "inclusion fails along direction [";
                for (Eigen::Index i = 0; i < inter.rows(); ++i) {
                    dir += std::to_string(inter(i, j));
                    if (i + 1 < inter.rows()) dir += ", ";
                }
                rep.witnesses.push_back(dir + "]");
                break;
            }
        }
    }
    return rep;
}

Matrix range_basis(const Matrix& M, double tol) {
    if (M.size() == 0) return Matrix(M.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return Matrix(M.rows(), 0);
    const double thresh = tol * sv(0);
    int r = 0;
    while (r < sv.size() && sv(r) > thresh) ++r;
    return svd.matrixU().leftCols(r);
}

Matrix kernel_basis(const Matrix& M, double tol) {
    if (M.size() == 0) return Matrix::Identity(M.cols(), M.cols());
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    const double thresh = tol * std::max(1.0, smax);
    int r = 0;
    while (r < sv.size() && sv(r) > thresh) ++r;
    return svd.matrixV().rightCols(M.cols() - r);
}

Matrix subspace_intersection(const Matrix& U, const Matrix& V, double tol) {
    if (U.cols() == 0 || V.cols() == 0) return Matrix(U.rows(), 0);
    // x in range(U) ∩ range(V)  <=>  x = U a = V b for some a, b.
    Matrix W(U.rows(), U.cols() + V.cols());
    W << U, -V;
    const Matrix null = kernel_basis(W, tol);
    if (null.cols() == 0) return Matrix(U.rows(), 0);
    const Matrix X = U * null.topRows(U.cols());
    return range_basis(X, tol);
}

int numerical_rank(const Matrix& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double thresh = tol * sv(0);
    int r = 0;
    while (r < sv.size() && sv(r) > thresh) ++r;
    return r;
}

Matrix invariant_subspace_smallest_real(const Matrix& M, int k) {
    require_square(M, "invariant_subspace_smallest_real");
    const int n = static_cast<int>(M.rows());
    if (k < 0 || k > n)
        throw InvalidInput("invariant_subspace_smallest_real: k out of range");
    if (k == 0) return Matrix(n, 0);

    Eigen::RealSchur<Matrix> schur(M);
    if (schur.info() != Eigen::Success)
        throw NumericalFailure("invariant_subspace_smallest_real: Schur iteration failed");
    Matrix T = schur.matrixT();
    Matrix Q = schur.matrixU();

    struct Block {
        int start, size;
        double re;
    };
    std::vector<Block> blocks;
    int i = 0;
    while (i < n) {
        const bool pair = (i + 1 < n) && (std::abs(T(i + 1, i)) > 0.0);
        const double re = pair ? 0.5 * (T(i, i) + T(i + 1, i + 1)) : T(i, i);
        blocks.push_back({i, pair ? 2 : 1, re});
        i += pair ? 2 : 1;
    }
    std::vector<size_t> order(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) order[b] = b;
    std::sort(order.begin(), order.end(),
              [&blocks](size_t a, size_t b) { return blocks[a].re < blocks[b].re; });

    std::vector<int> select(n, 0);
    int taken = 0;
    for (size_t b : order) {
        if (taken == k) break;
        if (taken + blocks[b].size > k)
            throw NumericalFailure(
                "invariant_subspace_smallest_real: selection would split a conjugate pair");
        for (int j = 0; j < blocks[b].size; ++j) select[blocks[b].start + j] = 1;
        taken += blocks[b].size;
    }

    std::vector<double> wr(n), wi(n);
    int m_out = 0, info = 0;
    double s = 0.0, sep = 0.0;
    const int lwork = std::max(1, n * n);
    const int liwork = std::max(1, n * n);
    std::vector<double> work(lwork);
    std::vector<int> iwork(liwork);
    dtrsen_("N", "V", select.data(), &n, T.data(), &n, Q.data(), &n, wr.data(), wi.data(),
            &m_out, &s, &sep, work.data(), &lwork, iwork.data(), &liwork, &info);
    if (info != 0)
        throw NumericalFailure("invariant_subspace_smallest_real: dtrsen failed, info=" +
                               std::to_string(info));
    if (m_out != k)
        throw NumericalFailure("invariant_subspace_smallest_real: cluster size mismatch");
    return Q.leftCols(k);
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace fbopt
