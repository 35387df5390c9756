#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fbopt/manifold.hpp"
#include "fbopt/model.hpp"
#include "fbopt/synthesis.hpp"
#include "fbopt/types.hpp"

namespace fbopt {

struct IntegrateOptions {
    double step{1e-3};
    bool adaptive{false};  // embedded 4(5) scheme instead of fixed-step RK4
    double abs_tol{1e-10};
    double rel_tol{1e-8};
    int record_stride{10};  // record every k-th fixed step
    double divergence_bound{1e6};
};

/// Plant + exosystem + one controller. Output feedback integrates
/// (x, z, w) with y = c(x, w), u = G_c(z); state feedback integrates (x, w)
/// with u = H_c(x, w).
struct ClosedLoop {
    Problem problem;
    std::optional<SynthesizedController> controller;  // output feedback
    std::optional<StaticLaw> law;                     // state feedback

    static ClosedLoop output_feedback(Problem prob, SynthesizedController ctrl);
    static ClosedLoop state_feedback(Problem prob, StaticLaw law);

    int nc() const { return controller ? controller->nc : 0; }
    int total_dim() const { return problem.plant.n + nc() + problem.exo.p; }
};

/// Recorded closed-loop run. Rows are samples. The gradient signal is always
/// recomputed from (u, w) through reduced_gradient; samples where the strict
/// gradient is undefined hold NaN.
struct Trajectory {
    std::vector<double> t;
    Matrix x, z, w, u, y, g;
    bool diverged{false};
    double step{0};
    bool adaptive{false};

    int samples() const { return static_cast<int>(t.size()); }
};

/// Low-level fixed-grid integration of an autonomous ODE; returns states at
/// the recording grid (first row = initial state). Divergence truncates.
struct OdeResult {
    std::vector<double> t;
    Matrix states;
    bool diverged{false};
};

OdeResult integrate_ode(const std::function<Vector(double, const Vector&)>& field,
                        const Vector& y0, double horizon, const IntegrateOptions& opts = {});

Trajectory integrate(const ClosedLoop& loop, const Vector& x0, const Vector& z0,
                     double horizon, const IntegrateOptions& opts = {});

/// Tail diagnostics of a run. The tail window is the final 20% of the horizon.
struct TrackingMetrics {
    double tail_sup_g{0};    // sup ||g(t)|| over the tail (finite samples)
    double rate_fit{0};      // exponential decay rate of ||g||; 0 when not reported
    bool rate_reported{false};  // requires >= 2 decades of decay
    bool settled{false};
    double state_tail{0};  // sup ||x - pi(w)|| over the tail when a manifold is given
    bool tail_has_nan{false};
};

TrackingMetrics metrics(const Trajectory& traj, double settle_tol = 1e-6,
                        const ManifoldSolution* manifold = nullptr);

/// Monte-Carlo local stability probe around the zero-disturbance equilibrium
/// plus the spectrum of the numerically linearized autonomous loop.
struct StabilityReport {
    double spectral_abscissa{0};
    bool all_eigenvalues_stable{false};
    int trials{0};
    int decayed{0};
    bool all_decayed{false};
};

StabilityReport local_stability_check(const ClosedLoop& loop, double epsilon, int trials,
                                      double horizon = 0, unsigned seed = 0);

}  // namespace fbopt
