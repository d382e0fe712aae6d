#include "sinhp/solver.hpp"

#include "sinhp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sinhp {

namespace {

double eps2_two_sinh(double eps, double u) {
    const double le = 2.0 * std::log(eps);
    const double au = std::abs(u);
    const double v = std::exp(le + au) - std::exp(le - au);
    return u >= 0 ? v : -v;
}

double eps2_two_cosh(double eps, double u) {
    const double le = 2.0 * std::log(eps);
    const double au = std::abs(u);
    return std::exp(le + au) + std::exp(le - au);
}

} // namespace

SolveReport newton_solve(const std::shared_ptr<const Grid>& grid, const Params& params,
                         const Field& seed, const NewtonOptions& options) {
    if (!seed.all_finite()) throw SolverError("newton_solve: seed contains non-finite values");
    const double eps = params.epsilon;
    RobinOperator op(grid, params.lambda);
    const int n = grid->n_nodes();

    auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        Eigen::VectorXd F = op.matrix() * u;
        for (int i = 0; i < n; ++i) F[i] -= eps2_two_sinh(eps, u[i]);
        return F;
    };

    SolveReport report;
    report.solution = Field(grid);
    Eigen::VectorXd u = seed.values;
    Eigen::VectorXd F = residual(u);
    double fnorm = F.lpNorm<Eigen::Infinity>();
    report.seed_residual_inf = fnorm;
    report.residual_history.push_back(fnorm);
    const double tol = std::max(options.tol_rel * fnorm, 1e-14);

    int consecutive_up = 0;
    int iter = 0;
    for (; iter < options.max_iterations && fnorm > tol; ++iter) {
        Eigen::SparseMatrix<double> J = op.matrix();
        for (int i = 0; i < n; ++i) J.coeffRef(i, i) -= eps2_two_cosh(eps, u[i]);
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw SolverError("newton_solve: Jacobian factorization failed at iteration " +
                              std::to_string(iter));
        Eigen::VectorXd delta = lu.solve(-F);
        if (!delta.allFinite())
            throw SolverError("newton_solve: non-finite Newton step at iteration " +
                              std::to_string(iter));
        const double dnorm = delta.lpNorm<Eigen::Infinity>();
        if (options.step_cap > 0 && dnorm > options.step_cap)
            delta *= options.step_cap / dnorm;

        // Armijo on the least-squares merit (the infinity norm is brittle when
        // the argmax alternates between coupled spike nodes).
        const double merit = F.squaredNorm();
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
            const Eigen::VectorXd trial = u + step * delta;
            const Eigen::VectorXd Ft = residual(trial);
            if (!Ft.allFinite()) continue;
            if (Ft.squaredNorm() < (1.0 - 2e-4 * step) * merit) {
                u = trial;
                F = Ft;
                fnorm = F.lpNorm<Eigen::Infinity>();
                accepted = true;
                break;
            }
        }
        report.residual_history.push_back(fnorm);
        if (!accepted) {
            report.converged = false;
            report.iterations = iter + 1;
            report.solution.values = u;
            report.final_residual_inf = fnorm;
            return report;
        }
        if (report.residual_history.size() >= 2 &&
            fnorm > report.residual_history[report.residual_history.size() - 2])
            ++consecutive_up;
        else
            consecutive_up = 0;
        if (consecutive_up >= 5) {
            report.converged = false;
            report.iterations = iter + 1;
            report.solution.values = u;
            report.final_residual_inf = fnorm;
            return report;
        }
    }

    report.converged = fnorm <= tol;
    report.iterations = iter;
    report.solution.values = u;
    report.final_residual_inf = fnorm;
    return report;
}

double newton_seed_residual(const std::shared_ptr<const Grid>& grid, const Params& params,
                            const Field& seed) {
    RobinOperator op(grid, params.lambda);
    Eigen::VectorXd F = op.matrix() * seed.values;
    for (int i = 0; i < grid->n_nodes(); ++i)
        F[i] -= eps2_two_sinh(params.epsilon, seed.values[i]);
    return F.lpNorm<Eigen::Infinity>();
}

SolveReport solve_with_continuation(const std::shared_ptr<const Grid>& grid,
                                    const std::shared_ptr<const GreenEngine>& engine,
                                    const ConcentrationConfig& config, const Params& params,
                                    const NewtonOptions& options) {
    if (!config.masses_computed)
        throw ConfigError("solve_with_continuation: config must carry finalized masses");
    const double epsilon = params.epsilon;
    const double lambda = params.lambda;

    auto healthy = [&](SolveReport& rep) {
        if (!rep.converged) return false;
        concentration_report(rep, config);
        return rep.peaks_ok;
    };

    AnsatzBundle bundle = build_ansatz(grid, config, params, engine);
    SolveReport rep = newton_solve(grid, params, bundle.U, options);
    int rungs = 0;
    if (!healthy(rep)) {
        // Spike lift: raise the peak nodes to the discrete mass balance plus a
        // margin and re-enter from above (the wide side of the Newton basin).
        Field lifted = bundle.U;
        for (int j = 0; j < config.m(); ++j) {
            const int pk = grid->nearest_node(config.xi[j]);
            const double target = std::log(8.0 * std::numbers::pi /
                                           (epsilon * epsilon * grid->cell_area(pk))) + 1.0;
            if (config.spins.a[j] * lifted.values[pk] < target)
                lifted.values[pk] = config.spins.a[j] * target;
        }
        NewtonOptions lift_opt = options;
        lift_opt.max_iterations = std::max(options.max_iterations, 60);
        SolveReport lrep = newton_solve(grid, params, lifted, lift_opt);
        if (healthy(lrep)) {
            lrep.seed_residual_inf = rep.seed_residual_inf;
            rep = std::move(lrep);
            rep.continuation_rungs = 1;
            return rep;
        }
    }
    if (!healthy(rep)) {
        // Gap between the nodal ansatz spike and the discrete mass balance
        // u* = log(8 pi / (eps^2 cell)); a positive gap puts the seed below
        // the nontrivial branch, whose from-below Newton basin is O(1) wide.
        double gap = 0.0;
        for (int j = 0; j < config.m(); ++j) {
            const int pk = grid->nearest_node(config.xi[j]);
            const double ustar = std::log(
                8.0 * std::numbers::pi / (epsilon * epsilon * grid->cell_area(pk)));
            gap = std::max(gap, ustar - config.spins.a[j] * bundle.U.values[pk]);
        }
        const double ratio = std::pow(2.0, 0.25);
        double eps_start = std::min(0.8, epsilon * std::exp(0.5 * std::max(0.0, gap) + 0.25));

        // The nontrivial branch folds at some eps_max(lambda, grid); if the
        // first rung lands beyond it the solve collapses to the trivial
        // branch. Retreat in quarter octaves until the rung is concentrating;
        // each candidate seed gets the same peak lift as above.
        Field current;
        bool found_start = false;
        while (eps_start > epsilon * 1.0001) {
            Params p0(eps_start, lambda, params.alpha, params.eps0);
            AnsatzBundle b0 = build_ansatz(grid, config, p0, engine);
            Field seed0 = b0.U;
            for (int j = 0; j < config.m(); ++j) {
                const int pk = grid->nearest_node(config.xi[j]);
                const double target =
                    std::log(8.0 * std::numbers::pi /
                             (eps_start * eps_start * grid->cell_area(pk))) + 1.0;
                if (config.spins.a[j] * seed0.values[pk] < target)
                    seed0.values[pk] = config.spins.a[j] * target;
            }
            NewtonOptions first = options;
            first.max_iterations = std::max(options.max_iterations, 60);
            SolveReport r0 = newton_solve(grid, p0, seed0, first);
            ++rungs;
            if (r0.converged && r0.solution.sup_norm() > 1.0) {
                current = r0.solution;
                found_start = true;
                break;
            }
            eps_start /= ratio;
        }
        if (found_start) {
            bool ok = true;
            for (double e = eps_start / ratio; ok; e /= ratio) {
                const bool last = e <= epsilon * ratio * 0.9999 || e <= epsilon;
                const double ee = last ? epsilon : e;
                Params pe(ee, lambda, params.alpha, params.eps0);
                SolveReport r = newton_solve(grid, pe, current, options);
                ++rungs;
                if (!r.converged || r.solution.sup_norm() <= 1.0) { ok = false; break; }
                current = r.solution;
                if (last) {
                    rep = std::move(r);
                    break;
                }
            }
            if (ok) {
                rep.seed_residual_inf = newton_seed_residual(grid, params, bundle.U);
                concentration_report(rep, config);
            }
        }
    }
    rep.continuation_rungs = rungs;
    return rep;
}

double energy(const Field& u, double eps, double lambda) {
    if (!u.all_finite()) throw SolverError("energy: field contains non-finite values");
    const Grid& g = *u.grid;
    const int nr = g.n_radial();
    const double du = g.du(), dt = g.dt();
    double quad = 0.0, nonlin = 0.0, boundary = 0.0;

    auto value = [&](int level, int k) { return u.values[g.node_index(level, k)]; };

    for (int idx = 0; idx < g.n_nodes(); ++idx) {
        const int i = g.level_of(idx);
        const int k = g.angular_of(idx);
        nonlin += eps2_two_cosh(eps, u.values[idx]) * g.cell_area(idx);
        if (g.is_boundary(idx)) boundary += u.values[idx] * u.values[idx] * g.arc_weight(idx);

        if (g.has_center() && idx == 0) continue; // center-cell gradient negligible (O(h^2) area)

        const double t = g.t_of(k);
        const double uu = g.u_of_level(i);
        double dudu;
        if (i == 0) {
            dudu = (-3.0 * value(0, k) + 4.0 * value(1, k) - value(2, k)) / (2.0 * du);
        } else if (i == nr) {
            dudu = (3.0 * value(nr, k) - 4.0 * value(nr - 1, k) + value(nr - 2, k)) / (2.0 * du);
        } else {
            dudu = (value(i + 1, k) - value(i - 1, k)) / (2.0 * du);
        }
        const double dudt =
            g.has_center() && i == 0 ? 0.0 : (value(i, k + 1) - value(i, k - 1)) / (2.0 * dt);

        const double c = g.radius_map(uu, t);
        const double cu = g.radius_map_du(uu, t);
        const double ct = g.radius_map_dt(uu, t);
        const double guu = (ct * ct + c * c) / (cu * cu * c * c);
        const double gut = -ct / (cu * c * c);
        const double gtt = 1.0 / (c * c);
        const double grad2 = guu * dudu * dudu + 2.0 * gut * dudu * dudt + gtt * dudt * dudt;
        quad += grad2 * g.cell_area(idx);
    }
    return 0.5 * quad - nonlin + 0.5 * lambda * boundary;
}

double reduced_energy_prediction(int m, double rho, double lambda, double phi_value) {
    if (m == 0) return 0.0;
    const double pi = std::numbers::pi;
    return -16.0 * pi * m + 8.0 * pi * m * std::log(8.0) -
           16.0 * pi * m * std::log(rho * lambda * lambda) - 4.0 * pi * phi_value;
}

double ansatz_energy(const AnsatzBundle& b) {
    const Grid& g = *b.grid;
    const int m = b.config.m();
    const double eps = b.params.epsilon;
    const double rho = b.params.rho();
    const double pi = std::numbers::pi;

    // Split radii: half the distance to the boundary and to other centers.
    std::vector<double> r_split(m);
    for (int j = 0; j < m; ++j) {
        double r = g.domain().distance_to_boundary(b.config.xi[j]);
        for (int i = 0; i < m; ++i)
            if (i != j) r = std::min(r, (b.config.xi[i] - b.config.xi[j]).norm());
        r_split[j] = 0.5 * r;
    }

    // Smooth part around center j: S_j = a_j H_j + sum_{i != j} a_i (w_i + H_i).
    auto smooth_at = [&](int j, const Point& x) {
        double s = b.config.spins.a[j] * b.corrector_at(j, x);
        for (int i = 0; i < m; ++i) {
            if (i == j) continue;
            s += b.config.spins.a[i] *
                 (bubble(b.config.mu[i], rho, b.config.xi[i], eps, x) + b.corrector_at(i, x));
        }
        return s;
    };

    // Quadratic + boundary part via -1/2 ∫ U lap U + 1/2 ∮ U (dU/dnu + lambda U):
    // lap U = -sum_j a_j eps^2 e^{w_j} concentrates, so T1_j = ∫ eps^2 e^{w_j} U
    // is integrated in closed form inside B(xi_j, r_split).
    double quad_boundary = 0.0;
    double t2_near = 0.0;
    for (int j = 0; j < m; ++j) {
        const double mu = b.config.mu[j];
        const double T = std::pow(r_split[j] / (mu * rho), 2);
        const double Cw = std::log(8.0 * mu * mu) - 2.0 * std::log(mu * mu * rho * rho) +
                          2.0 * std::log(rho / eps);
        const double frac = T / (1.0 + T);
        const double I_w = 8.0 * pi * (Cw * frac - 2.0 * (1.0 - (1.0 + std::log1p(T)) / (1.0 + T)));
        const double M0 = 8.0 * pi * frac;
        const double Sj = smooth_at(j, b.config.xi[j]);
        const double T1_in = b.config.spins.a[j] * I_w + M0 * Sj;
        quad_boundary += 0.5 * b.config.spins.a[j] * T1_in;

        // e^{a_j U} = e^{w_j} e^{E_j} with E_j = a_j S_j; the opposite
        // exponential inside B_j is O(eps^4 r^6 / rho^2) and is dropped.
        t2_near += M0 * std::exp(b.config.spins.a[j] * Sj);
    }

    // Far parts by nodal quadrature (integrands are smooth at grid scale there).
    double t1_far = 0.0, t2_far = 0.0;
    for (int idx = 0; idx < g.n_nodes(); ++idx) {
        const Point& x = g.node(idx);
        bool near_any = false;
        for (int j = 0; j < m; ++j)
            if ((x - b.config.xi[j]).norm() < r_split[j]) { near_any = true; break; }
        if (near_any) continue;
        const double area = g.cell_area(idx);
        for (int j = 0; j < m; ++j)
            t1_far += 0.5 * b.config.spins.a[j] *
                      bubble_eps2_exp(b.config.mu[j], rho, b.config.xi[j], eps, x) *
                      b.U.values[idx] * area;
        t2_far += eps2_two_cosh(eps, b.U.values[idx]) * area;
    }

    // Boundary defect correction 1/2 ∮ U (dU/dnu + lambda U).
    double defect_term = 0.0;
    for (int idx : g.boundary_indices())
        defect_term += 0.5 * b.U.values[idx] * b.robin_defect.values[idx] * g.arc_weight(idx);

    return quad_boundary + t1_far + defect_term - (t2_near + t2_far);
}

void concentration_report(SolveReport& report, const ConcentrationConfig& config) {
    const Field& u = report.solution;
    const Grid& g = *u.grid;
    const int nr = g.n_radial(), nt = g.n_angular();
    const double sup = u.sup_norm();
    if (sup < 1e-6) {
        report.peaks.clear();
        report.peaks_ok = false;
        report.concentration_message = "concentration failure: solution is identically small "
                                       "(collapsed to the trivial branch?)";
        return;
    }
    const double threshold = 0.25 * sup;

    std::vector<PeakInfo> peaks;
    auto consider = [&](int idx, bool is_max) {
        PeakInfo p;
        p.position = g.node(idx);
        p.value = u.values[idx];
        p.spin = is_max ? 1 : -1;
        p.lambda_d = config.lambda * g.domain().distance_to_boundary(p.position);
        peaks.push_back(p);
    };

    const int lo = g.has_center() ? 1 : 0;
    for (int i = lo; i <= nr; ++i) {
        for (int k = 0; k < nt; ++k) {
            const int idx = g.node_index(i, k);
            const double v = u.values[idx];
            if (std::abs(v) < threshold) continue;
            bool is_max = true, is_min = true;
            for (int di = -1; di <= 1 && (is_max || is_min); ++di) {
                for (int dk = -1; dk <= 1; ++dk) {
                    if (di == 0 && dk == 0) continue;
                    const int ii = i + di;
                    if (ii < lo - 1 || ii > nr) continue;
                    const int nidx = (g.has_center() && ii == 0) ? 0 : g.node_index(ii, k + dk);
                    if (nidx == idx) continue;
                    if (u.values[nidx] >= v) is_max = false;
                    if (u.values[nidx] <= v) is_min = false;
                }
            }
            if (is_max && v > 0) consider(idx, true);
            else if (is_min && v < 0) consider(idx, false);
        }
    }

    // Match each concentration point to the nearest peak of its spin.
    report.peaks.clear();
    std::vector<bool> used(peaks.size(), false);
    bool all_matched = true;
    for (int j = 0; j < config.m(); ++j) {
        int best = -1;
        double bestd = std::numeric_limits<double>::infinity();
        for (size_t p = 0; p < peaks.size(); ++p) {
            if (used[p] || peaks[p].spin != config.spins.a[j]) continue;
            const double d = (peaks[p].position - config.xi[j]).norm();
            if (d < bestd) { bestd = d; best = static_cast<int>(p); }
        }
        if (best < 0) { all_matched = false; continue; }
        used[best] = true;
        peaks[best].matched_center = j;
        peaks[best].dist_to_xi = bestd;
        report.peaks.push_back(peaks[best]);
    }
    report.peaks_ok = all_matched && static_cast<int>(report.peaks.size()) == config.m();
    if (!report.peaks_ok) {
        report.concentration_message =
            "concentration failure: found " + std::to_string(peaks.size()) + " peaks for m = " +
            std::to_string(config.m()) + " (sign pattern mismatch or missing peak)";
    } else {
        report.concentration_message = "ok";
    }
}

} // namespace sinhp
