#pragma once

#include <string>
#include <vector>

#include "fbopt/types.hpp"

namespace fbopt {

/// An eigenvalue counts as stable iff its real part is below -kStableMargin.
/// The margin guards against round-off reclassifying marginal exosystem modes.
inline constexpr double kStableMargin = 1e-9;

/// Default tolerance for rank and subspace-inclusion decisions.
inline constexpr double kRankTol = 1e-8;

struct Spectrum {
    std::vector<Complex> eigenvalues;
    int stable_count{0};
    int marginal_count{0};
    int unstable_count{0};

    double max_real() const;
};

enum class SubspaceKind { Controllable, Unobservable, Unstable, Stable };

/// Orthonormal basis of an invariant or structural subspace. `columns` is
/// n x k with orthonormal columns; k may be zero.
struct SubspaceBasis {
    Matrix columns;
    SubspaceKind kind{SubspaceKind::Unstable};

    int dim() const { return static_cast<int>(columns.cols()); }
};

/// Eigenvalues of a square real matrix, classified against the stability
/// margin. Conjugate pairs appear adjacently for real input.
Spectrum eigendecompose(const Matrix& M, double margin = kStableMargin);

/// Orthonormal basis of the invariant subspace for eigenvalues with real part
/// >= -margin (generalized eigenspaces included; computed by reordered real
/// Schur decomposition).
SubspaceBasis unstable_subspace(const Matrix& M, double margin = kStableMargin);

/// Orthonormal basis of the invariant subspace for eigenvalues with real part
/// < -margin.
SubspaceBasis stable_subspace(const Matrix& M, double margin = kStableMargin);

/// Orthonormal basis of sum_i Im(A^{i-1} B), i = 1..n.
SubspaceBasis controllable_subspace(const Matrix& A, const Matrix& B, double tol = kRankTol);

/// Orthonormal basis of the intersection of ker(C A^{i-1}), i = 1..n.
SubspaceBasis unobservable_subspace(const Matrix& C, const Matrix& A, double tol = kRankTol);

/// PBH rank test at every eigenvalue with real part >= -margin.
bool is_stabilizable(const Matrix& A, const Matrix& B, double margin = kStableMargin);
bool is_detectable(const Matrix& C, const Matrix& A, double margin = kStableMargin);

/// Outcome of the necessary-condition screen for exact tracking: plant
/// stabilizability and detectability, detectability of the extended pair
/// (C_L, A_L), and the subspace inclusion
///     unobservable(C_L, A_L) ∩ unstable(A_L)  ⊆  ker [0  T].
/// `witnesses` records an offending eigenvalue or direction per failed item.
struct NecessaryConditionsReport {
    bool stabilizable{false};
    bool detectable_plant{false};
    bool detectable_extended{false};
    bool inclusion_holds{false};
    std::vector<std::string> witnesses;

    bool all_pass() const {
        return stabilizable && detectable_plant && inclusion_holds;
    }
};

NecessaryConditionsReport check_necessary_conditions(const LinearizationData& lin,
                                                     double tol = kRankTol);

// Shared helpers used elsewhere in the library.

/// Orthonormal basis of the column space of M, rank decided at `tol` relative
/// to the leading singular value.
Matrix range_basis(const Matrix& M, double tol = kRankTol);

/// Orthonormal basis of the null space of M.
Matrix kernel_basis(const Matrix& M, double tol = kRankTol);

/// Orthonormal basis of range(U) ∩ range(V); U and V must have orthonormal
/// columns.
Matrix subspace_intersection(const Matrix& U, const Matrix& V, double tol = kRankTol);

/// Numerical rank via singular values, relative tolerance.
int numerical_rank(const Matrix& M, double tol = kRankTol);

/// Orthonormal basis of the invariant subspace spanned by the k eigenvalues
/// of smallest real part (conjugate blocks are never split). Used for
/// Hamiltonian-based Riccati solves where a margin-based split is unreliable.
Matrix invariant_subspace_smallest_real(const Matrix& M, int k);

/// Kronecker product A ⊗ B.
Matrix kron(const Matrix& A, const Matrix& B);

}  // namespace fbopt
