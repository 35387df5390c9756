#include "fbopt/poly.hpp"

#include <cmath>

#include "fbopt/errors.hpp"

namespace fbopt {

namespace {

void gen_exponents(int pos, int remaining, Eigen::VectorXi& alpha,
                   std::vector<Eigen::VectorXi>& out) {
    const int p = static_cast<int>(alpha.size());
    if (pos == p - 1) {
        alpha(pos) = remaining;
        out.push_back(alpha);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        alpha(pos) = a;
        gen_exponents(pos + 1, remaining - a, alpha, out);
    }
}

std::vector<Eigen::VectorXi> exponents_of_degree(int p, int ell) {
    std::vector<Eigen::VectorXi> out;
    Eigen::VectorXi alpha = Eigen::VectorXi::Zero(p);
    gen_exponents(0, ell, alpha, out);
    return out;
}

double monomial(const Vector& w, const Eigen::VectorXi& alpha) {
    double v = 1.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        for (int k = 0; k < alpha(i); ++k) v *= w(i);
    return v;
}

}  // namespace

int poly_basis_size(int p, int ell) {
    if (p < 1 || ell < 0) throw InvalidInput("poly_basis_size: need p >= 1, ell >= 0");
    // C(ell + p - 1, ell) by stable multiplicative accumulation.
    long long num = 1, den = 1;
    for (int i = 1; i <= ell; ++i) {
        num *= (p - 1 + i);
        den *= i;
    }
    return static_cast<int>(num / den);
}

Vector poly_basis(const Vector& w, int ell) {
    if (ell < 1) throw InvalidInput("poly_basis: degree must be >= 1");
    const auto exps = exponents_of_degree(static_cast<int>(w.size()), ell);
    Vector b(static_cast<Eigen::Index>(exps.size()));
    for (size_t i = 0; i < exps.size(); ++i)
        b(static_cast<Eigen::Index>(i)) = monomial(w, exps[i]);
    return b;
}

MonomialBasis::MonomialBasis(int p, int degree) : p_(p), degree_(degree) {
    if (p < 1 || degree < 1) throw InvalidInput("MonomialBasis: need p >= 1 and degree >= 1");
    for (int ell = 1; ell <= degree; ++ell) {
        auto exps = exponents_of_degree(p, ell);
        exponents_.insert(exponents_.end(), exps.begin(), exps.end());
    }
}

Vector MonomialBasis::eval(const Vector& w) const {
    Vector b(size());
    for (int i = 0; i < size(); ++i) b(i) = monomial(w, exponents_[static_cast<size_t>(i)]);
    return b;
}

Matrix MonomialBasis::jacobian(const Vector& w) const {
    Matrix J = Matrix::Zero(size(), p_);
    for (int i = 0; i < size(); ++i) {
        const auto& alpha = exponents_[static_cast<size_t>(i)];
        for (int j = 0; j < p_; ++j) {
            if (alpha(j) == 0) continue;
            Eigen::VectorXi reduced = alpha;
            reduced(j) -= 1;
            J(i, j) = alpha(j) * monomial(w, reduced);
        }
    }
    return J;
}

PolyMap PolyMap::zeros(int p, int out_dim, int degree) {
    PolyMap pm;
    pm.basis = MonomialBasis(p, degree);
    pm.coeffs = Matrix::Zero(out_dim, pm.basis.size());
    return pm;
}

}  // namespace fbopt
