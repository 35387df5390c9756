#pragma once

#include <vector>

#include "fbopt/types.hpp"

namespace fbopt {

/// All degree-ell monomials in p variables, listed with exponent tuples in
/// lexicographically descending order: [w1^l, w1^{l-1} w2, ..., wp^l].
Vector poly_basis(const Vector& w, int ell);

/// C(ell + p - 1, ell), the number of degree-ell monomials in p variables.
int poly_basis_size(int p, int ell);

/// Graded monomial basis of degrees 1..degree (no constant term), each degree
/// block in the listing order of poly_basis.
class MonomialBasis {
  public:
    MonomialBasis() = default;
    MonomialBasis(int p, int degree);

    int input_dim() const { return p_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }
    const std::vector<Eigen::VectorXi>& exponents() const { return exponents_; }

    Vector eval(const Vector& w) const;
    /// d(basis)/dw, size() x p.
    Matrix jacobian(const Vector& w) const;

  private:
    int p_{0};
    int degree_{0};
    std::vector<Eigen::VectorXi> exponents_;
};

/// Polynomial map R^p -> R^out with no constant term, so the value at 0 is 0.
/// Equilibrium offsets are stored by the callers that need them.
struct PolyMap {
    MonomialBasis basis;
    Matrix coeffs;  // out_dim x basis.size()

    int input_dim() const { return basis.input_dim(); }
    int out_dim() const { return static_cast<int>(coeffs.rows()); }
    int degree() const { return basis.degree(); }

    Vector operator()(const Vector& w) const { return coeffs * basis.eval(w); }
    Matrix jacobian(const Vector& w) const { return coeffs * basis.jacobian(w); }

    static PolyMap zeros(int p, int out_dim, int degree);
};

}  // namespace fbopt
