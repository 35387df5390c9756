#include "fbopt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fbopt/errors.hpp"
#include "fbopt/linalg.hpp"

namespace fbopt {

namespace {

using Field = std::function<Vector(double, const Vector&)>;

Vector rk4_step(const Field& f, double t, const Vector& y, double h) {
    const Vector k1 = f(t, y);
    const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vector k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Dormand-Prince 5(4) embedded pair; returns the 5th order solution and the
/// local error estimate.
void dopri_step(const Field& f, double t, const Vector& y, double h, Vector* y5, Vector* err) {
    const Vector k1 = f(t, y);
    const Vector k2 = f(t + h / 5.0, y + h * (k1 / 5.0));
    const Vector k3 = f(t + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const Vector k4 =
        f(t + 4.0 * h / 5.0, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    const Vector k5 = f(t + 8.0 * h / 9.0,
                        y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    const Vector k6 =
        f(t + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                          49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
    *y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                   2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const Vector k7 = f(t + h, *y5);
    const Vector y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                               393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                               187.0 / 2100.0 * k6 + k7 / 40.0);
    *err = *y5 - y4;
}

/// Advance from t to t_end, fixed-step RK4.
bool advance_fixed(const Field& f, double* t, Vector* y, double t_end, double h,
                   double divergence_bound) {
    const double span = t_end - *t;
    const int sub = std::max(1, static_cast<int>(std::ceil(span / h - 1e-12)));
    const double hs = span / sub;
    for (int i = 0; i < sub; ++i) {
        *y = rk4_step(f, *t, *y, hs);
        *t += hs;
        if (!y->allFinite() || y->norm() > divergence_bound) return false;
    }
    *t = t_end;
    return true;
}

bool advance_adaptive(const Field& f, double* t, Vector* y, double t_end,
                      const IntegrateOptions& opts, double* h_live) {
    double h = *h_live;
    while (*t < t_end - 1e-14) {
        h = std::min(h, t_end - *t);
        Vector y5, err;
        dopri_step(f, *t, *y, h, &y5, &err);
        double ratio = 0;
        for (Eigen::Index i = 0; i < y5.size(); ++i) {
            const double sc =
                opts.abs_tol + opts.rel_tol * std::max(std::abs((*y)(i)), std::abs(y5(i)));
            const double e = err(i) / sc;
            ratio += e * e;
        }
        ratio = std::sqrt(ratio / y5.size());
        if (ratio <= 1.0 || h <= 1e-14) {
            *t += h;
            *y = y5;
            if (!y->allFinite() || y->norm() > opts.divergence_bound) return false;
        }
        const double grow = (ratio > 0) ? 0.9 * std::pow(ratio, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        h = std::max(h, 1e-14);
    }
    *h_live = h;
    *t = t_end;
    return true;
}

}  // namespace

ClosedLoop ClosedLoop::output_feedback(Problem prob, SynthesizedController ctrl) {
    ClosedLoop loop;
    loop.problem = std::move(prob);
    loop.controller = std::move(ctrl);
    return loop;
}

ClosedLoop ClosedLoop::state_feedback(Problem prob, StaticLaw law_) {
    ClosedLoop loop;
    loop.problem = std::move(prob);
    loop.law = std::move(law_);
    return loop;
}

OdeResult integrate_ode(const Field& field, const Vector& y0, double horizon,
                        const IntegrateOptions& opts) {
    if (opts.step <= 0 || horizon < 0) throw InvalidInput("integrate_ode: bad step or horizon");
    const double grid = opts.step * opts.record_stride;
    const int segments = std::max(1, static_cast<int>(std::ceil(horizon / grid - 1e-12)));

    OdeResult out;
    out.t.reserve(static_cast<size_t>(segments) + 1);
    std::vector<Vector> states;
    states.reserve(static_cast<size_t>(segments) + 1);

    double t = 0;
    Vector y = y0;
    out.t.push_back(t);
    states.push_back(y);
    double h_live = opts.step;
    for (int k = 1; k <= segments; ++k) {
        const double t_end = std::min(horizon, k * grid);
        const bool ok = opts.adaptive
                            ? advance_adaptive(field, &t, &y, t_end, opts, &h_live)
                            : advance_fixed(field, &t, &y, t_end, opts.step,
                                            opts.divergence_bound);
        if (!ok) {
            out.diverged = true;
            break;
        }
        out.t.push_back(t);
        states.push_back(y);
    }
    out.states.resize(static_cast<int>(states.size()), y0.size());
    for (size_t i = 0; i < states.size(); ++i)
        out.states.row(static_cast<int>(i)) = states[i].transpose();
    return out;
}

Trajectory integrate(const ClosedLoop& loop, const Vector& x0, const Vector& z0,
                     double horizon, const IntegrateOptions& opts) {
    const auto& prob = loop.problem;
    const int n = prob.plant.n, p = prob.exo.p, m = prob.plant.m, q = prob.plant.q;
    const int nc = loop.nc();
    if (!loop.controller && !loop.law)
        throw InvalidInput("integrate: closed loop has no controller");
    if (x0.size() != n || z0.size() != nc)
        throw InvalidInput("integrate: initial condition dimensions inconsistent");

    Field field;
    if (loop.controller) {
        const auto& ctrl = *loop.controller;
        field = [&prob, &ctrl, n, nc, p](double, const Vector& state) {
            const Vector x = state.head(n);
            const Vector z = state.segment(n, nc);
            const Vector w = state.tail(p);
            const Vector y = prob.plant.c(x, w);
            const Vector u = ctrl.Gc(z);
            Vector ds(n + nc + p);
            ds.head(n) = prob.plant.f(x, u, w);
            ds.segment(n, nc) = ctrl.Fc(z, y);
            ds.tail(p) = prob.exo.s(w);
            return ds;
        };
    } else {
        field = [&prob, &law = *loop.law, n, p](double, const Vector& state) {
            const Vector x = state.head(n);
            const Vector w = state.tail(p);
            const Vector u = law.Hc(x, w);
            Vector ds(n + p);
            ds.head(n) = prob.plant.f(x, u, w);
            ds.tail(p) = prob.exo.s(w);
            return ds;
        };
    }

    Vector s0(n + nc + p);
    s0.head(n) = x0;
    if (nc > 0) s0.segment(n, nc) = z0;
    s0.tail(p) = prob.exo.w0;

    const OdeResult ode = integrate_ode(field, s0, horizon, opts);

    Trajectory traj;
    traj.t = ode.t;
    traj.diverged = ode.diverged;
    traj.step = opts.step;
    traj.adaptive = opts.adaptive;
    const int rows = static_cast<int>(ode.t.size());
    traj.x.resize(rows, n);
    traj.z.resize(rows, nc);
    traj.w.resize(rows, p);
    traj.u.resize(rows, m);
    traj.y.resize(rows, q);
    traj.g.resize(rows, m);
    for (int i = 0; i < rows; ++i) {
        const Vector state = ode.states.row(i).transpose();
        const Vector x = state.head(n);
        const Vector w = state.tail(p);
        traj.x.row(i) = x.transpose();
        traj.w.row(i) = w.transpose();
        Vector u;
        if (loop.controller) {
            const Vector z = state.segment(n, nc);
            traj.z.row(i) = z.transpose();
            u = loop.controller->Gc(z);
        } else {
            u = loop.law->Hc(x, w);
        }
        traj.u.row(i) = u.transpose();
        traj.y.row(i) = prob.plant.c(x, w).transpose();
        try {
            traj.g.row(i) = reduced_gradient(prob.objective, u, w).transpose();
        } catch (const DomainError&) {
            traj.g.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return traj;
}

TrackingMetrics metrics(const Trajectory& traj, double settle_tol,
                        const ManifoldSolution* manifold) {
    TrackingMetrics out;
    const int rows = traj.samples();
    if (rows == 0) return out;
    const double t0 = traj.t.front(), t1 = traj.t.back();
    const double tail_start = t0 + 0.8 * (t1 - t0);

    Vector gnorm(rows);
    for (int i = 0; i < rows; ++i) {
        const auto row = traj.g.row(i);
        gnorm(i) = row.allFinite() ? row.norm() : std::numeric_limits<double>::quiet_NaN();
    }

    for (int i = 0; i < rows; ++i) {
        if (traj.t[static_cast<size_t>(i)] < tail_start) continue;
        if (!std::isfinite(gnorm(i))) {
            out.tail_has_nan = true;
            continue;
        }
        out.tail_sup_g = std::max(out.tail_sup_g, gnorm(i));
        if (manifold) {
            const Vector w = traj.w.row(i).transpose();
            const Vector x = traj.x.row(i).transpose();
            out.state_tail = std::max(out.state_tail, (x - manifold->pi_at(w)).norm());
        }
    }
    out.settled = !traj.diverged && !out.tail_has_nan && out.tail_sup_g <= settle_tol;

    // Exponential-rate fit over the decaying segment, reported only when the
    // decay spans at least two decades.
    int peak = 0;
    for (int i = 0; i < rows; ++i)
        if (std::isfinite(gnorm(i)) && gnorm(i) > gnorm(peak)) peak = i;
    double gmin = std::numeric_limits<double>::infinity();
    for (int i = peak; i < rows; ++i)
        if (std::isfinite(gnorm(i)) && gnorm(i) > 0) gmin = std::min(gmin, gnorm(i));
    if (std::isfinite(gmin) && gmin > 0 && gnorm(peak) / gmin >= 100.0) {
        // Regress until the series first enters the floor at 2x its minimum.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int i = peak; i < rows; ++i) {
            if (!std::isfinite(gnorm(i)) || gnorm(i) <= 0) continue;
            const double ti = traj.t[static_cast<size_t>(i)];
            const double yi = std::log(gnorm(i));
            sx += ti;
            sy += yi;
            sxx += ti * ti;
            sxy += ti * yi;
            ++cnt;
            if (gnorm(i) <= 2.0 * gmin) break;
        }
        if (cnt >= 3) {
            const double denom = cnt * sxx - sx * sx;
            if (std::abs(denom) > 0) {
                out.rate_fit = -(cnt * sxy - sx * sy) / denom;
                out.rate_reported = true;
            }
        }
    }
    return out;
}

StabilityReport local_stability_check(const ClosedLoop& loop, double epsilon, int trials,
                                      double horizon, unsigned seed) {
    const auto& prob = loop.problem;
    const int n = prob.plant.n;
    const int nc = loop.nc();
    const int dim = n + nc;

    Vector eq(dim);
    eq.head(n) = prob.plant.x_eq;
    if (loop.controller)
        eq.tail(nc) = loop.controller->z_eq;

    const Vector w0 = Vector::Zero(prob.exo.p);
    auto auto_field = [&](const Vector& xi) {
        const Vector x = xi.head(n);
        Vector u;
        Vector dxi(dim);
        if (loop.controller) {
            const Vector z = xi.tail(nc);
            u = loop.controller->Gc(z);
            dxi.tail(nc) = loop.controller->Fc(z, prob.plant.c(x, w0));
        } else {
            u = loop.law->Hc(x, w0);
        }
        dxi.head(n) = prob.plant.f(x, u, w0);
        return dxi;
    };

    StabilityReport rep;
    const Matrix J = fd_jacobian(auto_field, eq, 1e-7);
    rep.spectral_abscissa = eigendecompose(J).max_real();
    rep.all_eigenvalues_stable = rep.spectral_abscissa < 0;

    if (horizon <= 0)
        horizon = rep.spectral_abscissa < 0
                      ? std::clamp(10.0 / -rep.spectral_abscissa, 1.0, 200.0)
                      : 10.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    rep.trials = trials;
    IntegrateOptions opts;
    opts.step = 1e-3;
    opts.record_stride = 1000000;  // endpoints only
    for (int k = 0; k < trials; ++k) {
        Vector dir(dim);
        for (int i = 0; i < dim; ++i) dir(i) = gauss(rng);
        dir.normalize();
        const Vector start = eq + epsilon * dir;
        const OdeResult r = integrate_ode(
            [&](double, const Vector& y) { return auto_field(y); }, start, horizon, opts);
        if (r.diverged) continue;
        const Vector final_state = r.states.row(r.states.rows() - 1).transpose();
        if ((final_state - eq).norm() <= 0.25 * epsilon) ++rep.decayed;
    }
    rep.all_decayed = rep.decayed == rep.trials;
    return rep;
}

}  // namespace fbopt
