#include "fbopt/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "fbopt/regulator_eq.hpp"

namespace fbopt {

namespace {

// --- sampling -------------------------------------------------------------

double radical_inverse(int base, long long index) {
    double result = 0.0, f = 1.0 / base;
    while (index > 0) {
        result += f * (index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                           31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

Vector rk4_step(const std::function<Vector(const Vector&)>& f, const Vector& y, double h) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// --- unknown layout --------------------------------------------------------

struct Layout {
    int n, m, nb_pi, nb_g;
    int size() const { return n * nb_pi + m * nb_g; }
    // Row-major per output: theta = [rows of Cpi..., rows of Cgamma...].
    void unpack(const Vector& theta, Matrix& Cpi, Matrix& Cg) const {
        Cpi.resize(n, nb_pi);
        Cg.resize(m, nb_g);
        for (int i = 0; i < n; ++i) Cpi.row(i) = theta.segment(i * nb_pi, nb_pi).transpose();
        const int off = n * nb_pi;
        for (int l = 0; l < m; ++l) Cg.row(l) = theta.segment(off + l * nb_g, nb_g).transpose();
    }
    Vector pack(const Matrix& Cpi, const Matrix& Cg) const {
        Vector theta(size());
        for (int i = 0; i < n; ++i) theta.segment(i * nb_pi, nb_pi) = Cpi.row(i).transpose();
        const int off = n * nb_pi;
        for (int l = 0; l < m; ++l) theta.segment(off + l * nb_g, nb_g) = Cg.row(l).transpose();
        return theta;
    }
};

struct PointData {
    Vector w;       // world coordinates
    Vector b_pi;    // pi basis at scaled point
    Vector b_g;     // gamma basis at scaled point
    Vector dbs_pi;  // Dbasis_pi(v) * (s(w) / box), so dpi/dw s(w) = Cpi * dbs_pi
};

struct FitWorkspace {
    const Problem* prob;
    MonomialBasis basis_pi, basis_g;
    Vector box;  // per-component scaling, w = box .* v
    Layout layout;
    std::vector<PointData> points;
    Vector x_off, u_off;
    double penalty{1e6};
};

PointData make_point(const FitWorkspace& ws, const Vector& w) {
    PointData pd;
    pd.w = w;
    const Vector v = w.cwiseQuotient(ws.box);
    pd.b_pi = ws.basis_pi.eval(v);
    pd.b_g = ws.basis_g.eval(v);
    pd.dbs_pi = ws.basis_pi.jacobian(v) * ws.prob->exo.s(w).cwiseQuotient(ws.box);
    return pd;
}

Matrix plant_dfdx(const Problem& prob, const Vector& x, const Vector& u, const Vector& w) {
    if (prob.plant.dfdx) return prob.plant.dfdx(x, u, w);
    return fd_jacobian([&](const Vector& v) { return prob.plant.f(v, u, w); }, x);
}

Matrix plant_dfdu(const Problem& prob, const Vector& x, const Vector& u, const Vector& w) {
    if (prob.plant.dfdu) return prob.plant.dfdu(x, u, w);
    return fd_jacobian([&](const Vector& v) { return prob.plant.f(x, v, w); }, u);
}

/// Residual rows for one point at the current coefficients; throws only if the
/// guarded gradient itself throws.
void point_residual(const FitWorkspace& ws, const Matrix& Cpi, const Matrix& Cg,
                    const PointData& pd, Vector* out) {
    const Vector xhat = ws.x_off + Cpi * pd.b_pi;
    const Vector uhat = ws.u_off + Cg * pd.b_g;
    out->head(ws.layout.n) = Cpi * pd.dbs_pi - ws.prob->plant.f(xhat, uhat, pd.w);
    out->tail(ws.layout.m) = guarded_reduced_gradient(ws.prob->objective, uhat, pd.w);
}

Vector full_residual(const FitWorkspace& ws, const Vector& theta) {
    Matrix Cpi, Cg;
    ws.layout.unpack(theta, Cpi, Cg);
    const int rows_per = ws.layout.n + ws.layout.m;
    Vector r(rows_per * static_cast<int>(ws.points.size()));
    Vector rp(rows_per);
    for (size_t k = 0; k < ws.points.size(); ++k) {
        try {
            point_residual(ws, Cpi, Cg, ws.points[k], &rp);
        } catch (const DomainError&) {
            rp.setConstant(ws.penalty);
        }
        r.segment(static_cast<int>(k) * rows_per, rows_per) = rp;
    }
    return r;
}

Matrix full_jacobian(const FitWorkspace& ws, const Vector& theta) {
    Matrix Cpi, Cg;
    ws.layout.unpack(theta, Cpi, Cg);
    const int n = ws.layout.n, m = ws.layout.m;
    const int nb_pi = ws.layout.nb_pi, nb_g = ws.layout.nb_g;
    const int off = n * nb_pi;
    const int rows_per = n + m;
    Matrix J = Matrix::Zero(rows_per * static_cast<int>(ws.points.size()), ws.layout.size());

    for (size_t k = 0; k < ws.points.size(); ++k) {
        const PointData& pd = ws.points[k];
        const Vector xhat = ws.x_off + Cpi * pd.b_pi;
        const Vector uhat = ws.u_off + Cg * pd.b_g;
        const int r0 = static_cast<int>(k) * rows_per;

        Matrix dfdx, dfdu, Rg;
        try {
            dfdx = plant_dfdx(*ws.prob, xhat, uhat, pd.w);
            dfdu = plant_dfdu(*ws.prob, xhat, uhat, pd.w);
            const double h = 1e-6 * (1.0 + uhat.norm());
            Rg.resize(m, m);
            for (int i = 0; i < m; ++i) {
                Vector up = uhat, dn = uhat;
                up(i) += h;
                dn(i) -= h;
                Rg.col(i) = (guarded_reduced_gradient(ws.prob->objective, up, pd.w) -
                             guarded_reduced_gradient(ws.prob->objective, dn, pd.w)) /
                            (2 * h);
            }
        } catch (const DomainError&) {
            continue;  // penalty rows carry no slope
        }

        for (int i = 0; i < n; ++i) {
            J.row(r0 + i).segment(i * nb_pi, nb_pi) += pd.dbs_pi.transpose();
            for (int a = 0; a < n; ++a)
                J.row(r0 + i).segment(a * nb_pi, nb_pi) -= dfdx(i, a) * pd.b_pi.transpose();
            for (int b = 0; b < m; ++b)
                J.row(r0 + i).segment(off + b * nb_g, nb_g) -= dfdu(i, b) * pd.b_g.transpose();
        }
        for (int l = 0; l < m; ++l)
            for (int b = 0; b < m; ++b)
                J.row(r0 + n + l).segment(off + b * nb_g, nb_g) += Rg(l, b) * pd.b_g.transpose();
    }
    return J;
}

/// Gauss-Newton rounds on the pi block alone (gamma held fixed): cheap linear
/// least-squares passes that re-anchor pi after the gamma pre-fit moved it far
/// from the linear initialization.
void pi_only_refit(const FitWorkspace& ws, Matrix* Cpi, const Matrix& Cg, int rounds) {
    const int n = ws.layout.n;
    const int nb = ws.layout.nb_pi;
    const int rows = n * static_cast<int>(ws.points.size());
    auto residual_norm = [&](const Matrix& C) {
        double s = 0;
        for (const auto& pd : ws.points) {
            const Vector xhat = ws.x_off + C * pd.b_pi;
            const Vector uhat = ws.u_off + Cg * pd.b_g;
            s += (C * pd.dbs_pi - ws.prob->plant.f(xhat, uhat, pd.w)).squaredNorm();
        }
        return s;
    };
    double cost = residual_norm(*Cpi);
    for (int round = 0; round < rounds; ++round) {
        Matrix J = Matrix::Zero(rows, n * nb);
        Vector res(rows);
        for (size_t k = 0; k < ws.points.size(); ++k) {
            const PointData& pd = ws.points[k];
            const Vector xhat = ws.x_off + (*Cpi) * pd.b_pi;
            const Vector uhat = ws.u_off + Cg * pd.b_g;
            const Matrix dfdx = plant_dfdx(*ws.prob, xhat, uhat, pd.w);
            const int r0 = static_cast<int>(k) * n;
            res.segment(r0, n) = (*Cpi) * pd.dbs_pi - ws.prob->plant.f(xhat, uhat, pd.w);
            for (int i = 0; i < n; ++i) {
                J.row(r0 + i).segment(i * nb, nb) += pd.dbs_pi.transpose();
                for (int a = 0; a < n; ++a)
                    J.row(r0 + i).segment(a * nb, nb) -= dfdx(i, a) * pd.b_pi.transpose();
            }
        }
        Matrix JtJ = J.transpose() * J;
        JtJ.diagonal().array() += 1e-10 * (1.0 + JtJ.diagonal().maxCoeff());
        const Vector delta = Eigen::LDLT<Matrix>(JtJ).solve(-J.transpose() * res);
        // Backtracking acceptance.
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 8; ++ls) {
            Matrix cand = *Cpi;
            for (int i = 0; i < n; ++i)
                cand.row(i) += step * delta.segment(i * nb, nb).transpose();
            const double c = residual_norm(cand);
            if (c < cost) {
                *Cpi = cand;
                cost = c;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
}

/// Pointwise critical input for the gamma pre-fit (single input): global grid
/// search on the reduced loss over expanding ranges (out-of-domain values
/// count as +inf), then golden-section refinement. Loss minimization avoids
/// the spurious sign changes a gradient-based search can hit at domain gaps.
bool pointwise_minimizer(const Problem& prob, const Vector& w, double u0, double* out) {
    auto loss = [&](double u) -> double {
        try {
            const double v = reduced_loss(prob.objective, Vector::Constant(1, u), w);
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (...) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double best_u = u0;
    double best_v = loss(u0);
    double best_spacing = 1.0 + std::abs(u0);
    double R = 1.0 + std::abs(u0);
    const int kGrid = 192;
    for (int k = 0; k < 11; ++k) {
        const double spacing = 2.0 * R / kGrid;
        for (int i = 0; i <= kGrid; ++i) {
            const double u = -R + spacing * i;
            const double v = loss(u);
            if (v < best_v) {
                best_v = v;
                best_u = u;
                best_spacing = spacing;
            }
        }
        R *= 2.0;
    }
    if (!std::isfinite(best_v)) return false;

    // Golden-section refine around the winning grid cell.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_u - 2.0 * best_spacing, hi = best_u + 2.0 * best_spacing;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = loss(x1), f2 = loss(x2);
    for (int it = 0; it < 160 && hi - lo > 1e-12 * (1.0 + std::abs(best_u)); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = loss(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = loss(x2);
        }
    }
    *out = 0.5 * (lo + hi);
    return std::isfinite(loss(*out));
}

}  // namespace

std::vector<Vector> halton_box_samples(const Vector& halfwidths, int count, int start) {
    const int p = static_cast<int>(halfwidths.size());
    if (p > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
        throw InvalidInput("halton_box_samples: dimension too large");
    std::vector<Vector> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        Vector w(p);
        for (int d = 0; d < p; ++d) {
            const double u = radical_inverse(kPrimes[d], start + k);
            w(d) = (2.0 * u - 1.0) * halfwidths(d);
        }
        pts.push_back(w);
    }
    return pts;
}

std::vector<Vector> exosystem_trajectory_samples(const Exosystem& exo, int count,
                                                 double horizon) {
    std::vector<Vector> pts;
    if (count <= 0 || exo.p == 0) return pts;
    pts.reserve(static_cast<size_t>(count));
    Vector w = exo.w0;
    double t = 0.0;
    for (int i = 0; i < count; ++i) {
        const double t_next = (i + 1) * horizon / count;
        const int sub = std::max(1, static_cast<int>(std::ceil((t_next - t) / 0.005)));
        const double h = (t_next - t) / sub;
        for (int step = 0; step < sub; ++step) w = rk4_step(exo.s, w, h);
        t = t_next;
        pts.push_back(w);
    }
    return pts;
}

Vector invariance_residual(const Problem& prob, const ManifoldSolution& sol, const Vector& w) {
    const int n = prob.plant.n, m = prob.plant.m;
    Vector r(n + m);
    const Vector x = sol.pi_at(w);
    const Vector u = sol.gamma_at(w);
    r.head(n) = sol.dpi_dw(w) * prob.exo.s(w) - prob.plant.f(x, u, w);
    r.tail(m) = reduced_gradient(prob.objective, u, w);
    return r;
}

ManifoldSolution fit_manifold(const Problem& prob, const FitOptions& opts) {
    const int n = prob.plant.n, m = prob.plant.m, p = prob.exo.p;
    if (opts.degree_pi < 1 || opts.degree_gamma < 1)
        throw InvalidInput("fit_manifold: degrees must be >= 1");

    ManifoldSolution sol;
    sol.x_offset = prob.plant.x_eq;
    sol.u_offset = prob.plant.u_eq;
    if (p == 0) {
        sol.report.converged = true;
        return sol;
    }

    FitWorkspace ws;
    ws.prob = &prob;
    ws.basis_pi = MonomialBasis(p, opts.degree_pi);
    ws.basis_g = MonomialBasis(p, opts.degree_gamma);
    ws.layout = Layout{n, m, ws.basis_pi.size(), ws.basis_g.size()};
    ws.x_off = prob.plant.x_eq;
    ws.u_off = prob.plant.u_eq;

    ws.box = Vector::Ones(p);
    for (int i = 0; i < p; ++i) {
        const double r = (prob.exo.region.size() == p) ? prob.exo.region(i) : 0.0;
        ws.box(i) = r > 0 ? r * opts.region_margin : 1.0;
    }

    // Collocation set: low-discrepancy points in the region box plus samples
    // along the exosystem trajectory.
    const int n_halton =
        opts.collocation_per_basis * std::max(ws.basis_pi.size(), ws.basis_g.size());
    const int start_train = 1 + static_cast<int>(opts.seed % 1000) * 1000;
    for (const Vector& w : halton_box_samples(ws.box, n_halton, start_train))
        ws.points.push_back(make_point(ws, w));
    for (const Vector& w :
         exosystem_trajectory_samples(prob.exo, opts.trajectory_samples, opts.trajectory_horizon))
        ws.points.push_back(make_point(ws, w));
    sol.report.collocation_count = static_cast<int>(ws.points.size());

    // Degree-1 initialization from the linear regulator solution, mapped into
    // the scaled coordinates (block order: degree-1 monomials come first).
    Matrix Cpi = Matrix::Zero(n, ws.basis_pi.size());
    Matrix Cg = Matrix::Zero(m, ws.basis_g.size());
    bool have_linear_init = false;
    try {
        const LinearizationData lin = linearize(prob);
        const RegulatorSolution rs =
            solve_regulator_linear(lin.A, lin.B, lin.P, lin.S, lin.R, lin.T);
        Cpi.leftCols(p) = rs.Pi * ws.box.asDiagonal();
        Cg.leftCols(p) = rs.Gamma * ws.box.asDiagonal();
        have_linear_init = true;
    } catch (const Error&) {
        // Leave the zero initialization; the probe relies on the plateau.
    }
    (void)have_linear_init;

    // If the strict gradient is undefined somewhere at the initial gamma, seed
    // gamma from pointwise critical inputs instead (single-input problems).
    if (m == 1) {
        int violations = 0;
        for (const auto& pd : ws.points) {
            const Vector uhat = ws.u_off + Cg * pd.b_g;
            try {
                reduced_gradient(prob.objective, uhat, pd.w);
            } catch (const DomainError&) {
                ++violations;
            }
        }
        if (violations > 0) {
            std::vector<Vector> rows;
            std::vector<double> vals;
            for (const auto& pd : ws.points) {
                const double u0 = (ws.u_off + Cg * pd.b_g)(0);
                double ustar;
                if (pointwise_minimizer(prob, pd.w, u0, &ustar)) {
                    rows.push_back(pd.b_g);
                    vals.push_back(ustar - ws.u_off(0));
                }
            }
            if (rows.size() >= static_cast<size_t>(ws.basis_g.size())) {
                Matrix Bmat(static_cast<int>(rows.size()), ws.basis_g.size());
                Vector rhs(static_cast<int>(rows.size()));
                for (size_t i = 0; i < rows.size(); ++i) {
                    Bmat.row(static_cast<int>(i)) = rows[i].transpose();
                    rhs(static_cast<int>(i)) = vals[i];
                }
                Cg.row(0) =
                    Bmat.completeOrthogonalDecomposition().solve(rhs).transpose();
                // The linear-solve pi matched the old gamma; re-anchor it.
                pi_only_refit(ws, &Cpi, Cg, 6);
            }
        }
    }

    // Damped Gauss-Newton (Levenberg-Marquardt with diagonal scaling).
    Vector theta = ws.layout.pack(Cpi, Cg);
    Vector r = full_residual(ws, theta);
    double cost = r.squaredNorm();
    Vector best_theta = theta;
    double best_cost = cost;
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const Matrix J = full_jacobian(ws, theta);
        const Vector grad = J.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol * std::max(1.0, std::sqrt(cost))) {
            converged = true;
            break;
        }
        const Matrix JtJ = J.transpose() * J;
        const Vector D = JtJ.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        Vector delta;
        for (int inner = 0; inner < 16; ++inner) {
            Matrix A = JtJ;
            A.diagonal() += lambda * D;
            delta = Eigen::LDLT<Matrix>(A).solve(-grad);
            const Vector theta_new = theta + delta;
            const Vector r_new = full_residual(ws, theta_new);
            const double cost_new = r_new.squaredNorm();
            if (std::isfinite(cost_new) && cost_new < cost) {
                theta = theta_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_theta = theta;
        }
        if (!accepted) break;
        if (delta.norm() <= opts.step_tol * (1.0 + theta.norm())) {
            converged = true;
            break;
        }
    }
    if (cost > best_cost) {
        theta = best_theta;
        cost = best_cost;
    }
    sol.report.iterations = iter;
    sol.report.converged = converged;

    // Convert scaled-coordinate coefficients back to world coordinates:
    // a monomial v^alpha = w^alpha / box^alpha.
    ws.layout.unpack(theta, Cpi, Cg);
    sol.pi = PolyMap::zeros(p, n, opts.degree_pi);
    sol.gamma = PolyMap::zeros(p, m, opts.degree_gamma);
    for (int j = 0; j < ws.basis_pi.size(); ++j) {
        const auto& alpha = ws.basis_pi.exponents()[static_cast<size_t>(j)];
        double scale = 1.0;
        for (int d = 0; d < p; ++d) scale *= std::pow(ws.box(d), alpha(d));
        sol.pi.coeffs.col(j) = Cpi.col(j) / scale;
    }
    for (int j = 0; j < ws.basis_g.size(); ++j) {
        const auto& alpha = ws.basis_g.exponents()[static_cast<size_t>(j)];
        double scale = 1.0;
        for (int d = 0; d < p; ++d) scale *= std::pow(ws.box(d), alpha(d));
        sol.gamma.coeffs.col(j) = Cg.col(j) / scale;
    }

    // Validation on a fresh sample, strict gradient. The relative residual is
    // normalized by the RMS magnitude of the vector field and gradient values
    // encountered on the fitted maps.
    const int n_val = std::max(200, n_halton / 5);
    const int start_val = 7777777 + static_cast<int>(opts.seed % 1000) * 1000;
    std::vector<Vector> val_pts = halton_box_samples(ws.box, n_val, start_val);
    for (const Vector& w : exosystem_trajectory_samples(
             prob.exo, opts.trajectory_samples / 2, opts.trajectory_horizon * 0.73))
        val_pts.push_back(w);

    double sum_sq = 0, scale_sq = 0;
    long count_comp = 0, scale_comp = 0;
    int violations = 0;
    for (const Vector& w : val_pts) {
        const Vector x = sol.pi_at(w);
        const Vector u = sol.gamma_at(w);
        const Vector fval = prob.plant.f(x, u, w);
        Vector gval;
        try {
            gval = reduced_gradient(prob.objective, u, w);
        } catch (const DomainError&) {
            ++violations;
            gval = guarded_reduced_gradient(prob.objective, u, w);
        }
        const Vector rf = sol.dpi_dw(w) * prob.exo.s(w) - fval;
        sum_sq += rf.squaredNorm() + gval.squaredNorm();
        count_comp += rf.size() + gval.size();
        scale_sq += fval.squaredNorm() + gval.squaredNorm();
        scale_comp += fval.size() + gval.size();
    }
    sol.report.validation_count = static_cast<int>(val_pts.size());
    sol.report.domain_violations = violations;
    sol.report.f_scale = std::sqrt(scale_sq / std::max(1L, scale_comp));
    sol.report.validation_residual =
        std::sqrt(sum_sq / std::max(1L, count_comp)) / (1.0 + sol.report.f_scale);
    sol.report.training_residual =
        std::sqrt(cost / std::max<std::ptrdiff_t>(1, r.size())) / (1.0 + sol.report.f_scale);

    if (sol.report.validation_residual > opts.target_residual)
        throw FitFailure("fit_manifold: validation residual " +
                             std::to_string(sol.report.validation_residual) +
                             " above target " + std::to_string(opts.target_residual),
                         sol);
    return sol;
}

SolvabilityReport solvability_probe(const Problem& prob, int max_degree, FitOptions base) {
    SolvabilityReport rep;
    if (prob.exo.p == 0) {
        rep.verdict = SolvabilityVerdict::Solvable;
        rep.achieved_degree = 0;
        return rep;
    }
    const double tol = base.target_residual;
    for (int d = 1; d <= max_degree; ++d) {
        FitOptions o = base;
        o.degree_pi = d;
        o.degree_gamma = d;
        o.target_residual = std::numeric_limits<double>::infinity();
        double res;
        try {
            res = fit_manifold(prob, o).report.validation_residual;
        } catch (const FitFailure& ff) {
            res = ff.best.report.validation_residual;
        }
        rep.residuals.push_back(res);
        if (res <= tol) {
            rep.verdict = SolvabilityVerdict::Solvable;
            rep.achieved_degree = d;
            return rep;
        }
    }
    bool plateau = rep.residuals.size() >= 2;
    for (size_t i = 1; i < rep.residuals.size(); ++i)
        plateau = plateau && rep.residuals[i] > 0.5 * rep.residuals[i - 1];
    rep.verdict = plateau ? SolvabilityVerdict::Obstructed : SolvabilityVerdict::Inconclusive;
    return rep;
}

}  // namespace fbopt
