#pragma once

#include <vector>

#include "fbopt/errors.hpp"
#include "fbopt/model.hpp"
#include "fbopt/poly.hpp"
#include "fbopt/types.hpp"

namespace fbopt {

struct FitOptions {
    int degree_pi{4};
    int degree_gamma{4};
    /// Collocation count = collocation_per_basis * (largest basis size).
    int collocation_per_basis{50};
    /// Samples along the exosystem trajectory appended to the collocation set.
    int trajectory_samples{200};
    double trajectory_horizon{20.0};
    /// Sampling box = exosystem region inflated by this factor.
    double region_margin{1.2};
    unsigned seed{0};
    int max_iterations{200};
    double grad_tol{1e-12};
    double step_tol{1e-14};
    /// Validation residual above this raises FitFailure after the iteration cap.
    double target_residual{1e-5};
};

struct FitReport {
    double training_residual{0};    // relative, on the collocation set
    double validation_residual{0};  // relative, on fresh samples
    double f_scale{0};              // normalizer of the relative residual
    int iterations{0};
    int collocation_count{0};
    int validation_count{0};
    int domain_violations{0};  // validation points with no strict gradient
    bool converged{false};
};

/// Polynomial regulator maps pi (state) and gamma (input) with equilibrium
/// offsets stored separately so pi(0) = x_eq and gamma(0) = u_eq exactly.
struct ManifoldSolution {
    PolyMap pi;
    PolyMap gamma;
    Vector x_offset;
    Vector u_offset;
    FitReport report;

    Vector pi_at(const Vector& w) const { return x_offset + pi(w); }
    Vector gamma_at(const Vector& w) const { return u_offset + gamma(w); }
    Matrix dpi_dw(const Vector& w) const { return pi.jacobian(w); }
    Matrix dgamma_dw(const Vector& w) const { return gamma.jacobian(w); }
};

/// Fit failure carrying the best iterate found.
struct FitFailure : Error {
    FitFailure(const std::string& msg, ManifoldSolution best_)
        : Error(msg), best(std::move(best_)) {}
    ManifoldSolution best;
};

/// Stacked invariance defect at one disturbance sample:
///   [ dpi/dw s(w) - f(pi(w), gamma(w), w) ;  grad_u phi(gamma(w), w) ].
Vector invariance_residual(const Problem& prob, const ManifoldSolution& sol, const Vector& w);

/// Least-squares collocation fit of (pi, gamma) by damped Gauss-Newton, with
/// the degree-1 blocks initialized from the linear regulator solution.
ManifoldSolution fit_manifold(const Problem& prob, const FitOptions& opts = {});

enum class SolvabilityVerdict { Solvable, Obstructed, Inconclusive };

/// Empirical solvability screen: fits of increasing degree; "solvable" when
/// the validation residual crosses the tolerance, "obstructed" when it
/// plateaus across degrees. A numerical surrogate, not a proof.
struct SolvabilityReport {
    SolvabilityVerdict verdict{SolvabilityVerdict::Inconclusive};
    int achieved_degree{0};
    std::vector<double> residuals;  // per degree 1..max_degree
};

SolvabilityReport solvability_probe(const Problem& prob, int max_degree,
                                    FitOptions base = {});

/// Deterministic low-discrepancy samples in the centered box given by
/// half-widths; `start` offsets the Halton index (disjoint streams).
std::vector<Vector> halton_box_samples(const Vector& halfwidths, int count, int start = 1);

/// Equally spaced samples of the exosystem trajectory from w0.
std::vector<Vector> exosystem_trajectory_samples(const Exosystem& exo, int count,
                                                 double horizon);

}  // namespace fbopt
