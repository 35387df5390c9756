#include <doctest.h>

#include <complex>
#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"

using namespace fbopt;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix M(2, 2);
    M << a, b, c, d;
    return M;
}

/// Roots of a quadratic s^2 + b s + c, used as an independent oracle.
std::pair<Complex, Complex> quadratic_roots(double b, double c) {
    const Complex disc = std::sqrt(Complex(b * b - 4 * c, 0));
    return {(-b + disc) / 2.0, (-b - disc) / 2.0};
}

}  // namespace

TEST_CASE("eigendecompose classifies rotation and diagonal matrices") {
    const Spectrum rot = eigendecompose(mat2(0, 1, -1, 0));
    CHECK(rot.marginal_count == 2);
    CHECK(rot.stable_count == 0);
    CHECK(rot.unstable_count == 0);
    bool found_i = false;
    for (const auto& ev : rot.eigenvalues)
        if (std::abs(ev - Complex(0, 1)) < 1e-12) found_i = true;
    CHECK(found_i);

    const Spectrum diag = eigendecompose(mat2(-1, 0, 0, -2));
    CHECK(diag.stable_count == 2);
}

TEST_CASE("eigendecompose agrees with the characteristic-polynomial oracle") {
    // Companion matrix of s^2 + 3s + 2.
    Matrix M = mat2(0, 1, -2, -3);
    const auto [r1, r2] = quadratic_roots(3, 2);
    const Spectrum sp = eigendecompose(M);
    std::vector<double> got{sp.eigenvalues[0].real(), sp.eigenvalues[1].real()};
    std::sort(got.begin(), got.end());
    CHECK(got[0] == doctest::Approx(std::min(r1.real(), r2.real())).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(std::max(r1.real(), r2.real())).epsilon(1e-12));
    CHECK(sp.stable_count == 2);
}

TEST_CASE("eigendecompose keeps conjugate pairs adjacent for real input") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix M(4, 4);
        for (int i = 0; i < 16; ++i) M(i / 4, i % 4) = g(rng);
        const Spectrum sp = eigendecompose(M);
        CHECK(sp.stable_count + sp.marginal_count + sp.unstable_count == 4);
        for (size_t i = 0; i < sp.eigenvalues.size(); ++i) {
            if (std::abs(sp.eigenvalues[i].imag()) > 1e-12) {
                REQUIRE(i + 1 < sp.eigenvalues.size());
                CHECK(std::abs(sp.eigenvalues[i + 1] - std::conj(sp.eigenvalues[i])) < 1e-9);
                ++i;
            }
        }
    }
}

TEST_CASE("unstable subspace of diag(1, -1) is span(e1)") {
    const SubspaceBasis b = unstable_subspace(mat2(1, 0, 0, -1));
    REQUIRE(b.dim() == 1);
    CHECK(std::abs(std::abs(b.columns(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(b.columns(1, 0)) < 1e-12);
}

TEST_CASE("unstable subspace handles defective matrices (double integrator)") {
    const SubspaceBasis b = unstable_subspace(mat2(0, 1, 0, 0));
    CHECK(b.dim() == 2);
}

TEST_CASE("controllable subspace of the double integrator is full") {
    Matrix B(2, 1);
    B << 0, 1;
    const SubspaceBasis b = controllable_subspace(mat2(0, 1, 0, 0), B);
    CHECK(b.dim() == 2);
}

TEST_CASE("unobservable subspace matches the brute-force kernel intersection") {
    Matrix C(1, 2);
    C << 1, 0;
    const Matrix A = mat2(1, 0, 0, 2);
    const SubspaceBasis b = unobservable_subspace(C, A);
    REQUIRE(b.dim() == 1);
    // Oracle: kernel of [C; CA] by hand is span(e2).
    CHECK(std::abs(b.columns(0, 0)) < 1e-12);
    CHECK(std::abs(std::abs(b.columns(1, 0)) - 1.0) < 1e-12);

    // Orthonormality of every basis this module returns.
    const Matrix I = b.columns.transpose() * b.columns;
    CHECK((I - Matrix::Identity(1, 1)).norm() < 1e-10);
}

TEST_CASE("stabilizability: Hurwitz always passes, repeated unstable mode fails") {
    Matrix B(2, 1);
    B << 1, 0;
    CHECK(is_stabilizable(mat2(-1, 0, 0, -2), B));
    // PBH rank of [A - I, B] is 1 < 2 for A = diag(1, 1), B = e1.
    CHECK_FALSE(is_stabilizable(mat2(1, 0, 0, 1), B));
}

TEST_CASE("pendulum linearization at the upright equilibrium is stabilizable") {
    // Oracle: PBH by hand. A = [[0, 1], [alpha, -beta]], B = [0; -gamma]:
    // [A - s I, B] has full rank for every s because B hits the second row and
    // the first row [-s, 1] is nonzero.
    const double alpha = 0.316 * 9.81 * 0.023 / 0.000444;
    const double beta = 0.1 * 0.023 * 0.023 / 0.000444;
    const double gamma = 0.316 * 0.023 / 0.000444;
    Matrix A = mat2(0, 1, alpha, -beta);
    Matrix B(2, 1);
    B << 0, -gamma;
    CHECK(is_stabilizable(A, B));
    CHECK(is_detectable(Matrix::Identity(2, 2), A));
}

TEST_CASE("PBH test equals the subspace-inclusion definition on random instances") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_int_distribution<int> mdim(1, 3);
    int disagreements = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = dim(rng), m = mdim(rng);
        Matrix A(n, n), B(n, m);
        for (int i = 0; i < n * n; ++i) A(i / n, i % n) = g(rng);
        for (int i = 0; i < n * m; ++i) B(i / m, i % m) = g(rng);
        // Occasionally zero a column to create uncontrollable directions.
        if (trial % 3 == 0) B.setZero();

        const bool pbh = is_stabilizable(A, B);
        const Matrix unst = unstable_subspace(A).columns;
        const Matrix ctrb = controllable_subspace(A, B).columns;
        Matrix stacked(n, ctrb.cols() + unst.cols());
        if (unst.cols() == 0) {
            CHECK(pbh);
            continue;
        }
        stacked << ctrb, unst;
        const bool incl = numerical_rank(stacked) == numerical_rank(ctrb);
        if (pbh != incl) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("necessary conditions pass on the scalar observer example") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, 1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Constant(1, 1, -2.0);
    lin.P = Matrix::Zero(1, 1);
    lin.Q = Matrix::Constant(1, 1, 1.0);
    lin.S = Matrix::Zero(1, 1);
    lin.T = Matrix::Constant(1, 1, 1.0);
    const NecessaryConditionsReport rep = check_necessary_conditions(lin);
    CHECK(rep.stabilizable);
    CHECK(rep.detectable_plant);
    CHECK(rep.detectable_extended);
    CHECK(rep.inclusion_holds);
    CHECK(rep.all_pass());
}

TEST_CASE("T = 0 makes the inclusion hold even when the w-block is unobservable") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, -1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Constant(1, 1, 1.0);
    lin.P = Matrix::Zero(1, 1);
    lin.Q = Matrix::Zero(1, 1);  // w invisible in y
    lin.S = Matrix::Zero(1, 1);  // marginal mode
    lin.T = Matrix::Zero(1, 1);  // ker [0 0] is everything
    const NecessaryConditionsReport rep = check_necessary_conditions(lin);
    CHECK_FALSE(rep.detectable_extended);
    CHECK(rep.inclusion_holds);
}

TEST_CASE("invisible unstable exosystem mode with full-rank T breaks the inclusion") {
    LinearizationData lin;
    lin.A = Matrix::Constant(1, 1, -1.0);
    lin.B = Matrix::Constant(1, 1, 1.0);
    lin.C = Matrix::Constant(1, 1, 1.0);
    lin.P = Matrix::Zero(1, 1);
    lin.Q = Matrix::Zero(1, 1);
    lin.S = Matrix::Constant(1, 1, 1.0);
    lin.T = Matrix::Constant(1, 1, 1.0);
    const NecessaryConditionsReport rep = check_necessary_conditions(lin);
    CHECK_FALSE(rep.detectable_extended);
    CHECK_FALSE(rep.inclusion_holds);
    CHECK_FALSE(rep.all_pass());
    CHECK_FALSE(rep.witnesses.empty());
}

TEST_CASE("detectable extended pair implies the inclusion") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        LinearizationData lin;
        lin.A = mat2(g(rng), g(rng), g(rng), g(rng));
        lin.B = Matrix(2, 1);
        lin.B << g(rng), g(rng);
        lin.C = Matrix(1, 2);
        lin.C << g(rng), g(rng);
        lin.P = Matrix(2, 2);
        lin.P << g(rng), g(rng), g(rng), g(rng);
        lin.Q = Matrix(1, 2);
        lin.Q << g(rng), g(rng);
        lin.S = mat2(0, 1, -1, 0);
        lin.T = Matrix(1, 2);
        lin.T << g(rng), g(rng);
        const NecessaryConditionsReport rep = check_necessary_conditions(lin);
        if (rep.detectable_extended) CHECK(rep.inclusion_holds);
    }
}

TEST_CASE("dimension mismatch raises InvalidInput") {
    LinearizationData lin;
    lin.A = mat2(1, 0, 0, 1);
    lin.B = Matrix::Constant(1, 1, 1.0);  // wrong row count
    lin.C = Matrix::Constant(1, 2, 1.0);
    lin.P = Matrix::Zero(2, 1);
    lin.Q = Matrix::Zero(1, 1);
    lin.S = Matrix::Zero(1, 1);
    lin.T = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(check_necessary_conditions(lin), InvalidInput);
}

TEST_CASE("kron matches the definition on a hand example") {
    Matrix A = mat2(1, 2, 3, 4);
    Matrix B = Matrix::Identity(2, 2);
    const Matrix K = kron(A, B);
    CHECK(K.rows() == 4);
    CHECK(K(0, 0) == 1);
    CHECK(K(0, 2) == 2);
    CHECK(K(3, 1) == 3);
    CHECK(K(2, 2) == 4);
}
