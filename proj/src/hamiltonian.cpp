#include "sinhp/hamiltonian.hpp"

#include "sinhp/asymptotics.hpp"
#include "sinhp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace sinhp {

SpinConfig::SpinConfig(std::vector<int> spins) : a(std::move(spins)) {
    if (a.empty()) throw ConfigError("SpinConfig: need at least one spin");
    for (int s : a)
        if (s != 1 && s != -1) throw ConfigError("spin must be +-1");
}

ConcentrationConfig::ConcentrationConfig(std::vector<Point> points, SpinConfig s, double lam)
    : xi(std::move(points)), spins(std::move(s)), lambda(lam) {
    if (static_cast<int>(xi.size()) != spins.m())
        throw ConfigError("ConcentrationConfig: point and spin counts differ");
    if (!(lambda > 0)) throw ConfigError("ConcentrationConfig: lambda must be positive");
}

void ConcentrationConfig::validate(const Domain& domain) const {
    for (size_t j = 0; j < xi.size(); ++j) {
        if (!domain.contains(xi[j]) || domain.distance_to_boundary(xi[j]) <= 0)
            throw DomainError("ConcentrationConfig: point " + std::to_string(j) +
                              " is not an interior point");
        for (size_t i = 0; i < j; ++i)
            if ((xi[i] - xi[j]).norm() == 0.0)
                throw SingularityError("ConcentrationConfig: coincident points");
    }
}

FeasibleSet FeasibleSet::axis(const Domain& domain, double K, std::optional<double> delta_sep) {
    if (!(K > 1)) throw ConfigError("FeasibleSet: K must exceed 1");
    FeasibleSet f;
    f.mode = Mode::axis_symmetric;
    f.K = K;
    const auto [a, b] = domain.axis_chord();
    f.delta_sep = delta_sep.value_or((b - a) / 4.0);
    return f;
}

FeasibleSet FeasibleSet::per_component(const Domain& domain, std::vector<int> assignment, double K,
                                       std::optional<double> delta_sep) {
    if (!(K > 1)) throw ConfigError("FeasibleSet: K must exceed 1");
    if (!domain.is_annulus())
        throw ConfigError("FeasibleSet: per-component mode needs a multiply connected domain");
    for (int c : assignment)
        if (c < 0 || c >= domain.n_boundary_components())
            throw ConfigError("FeasibleSet: component assignment out of range");
    FeasibleSet f;
    f.mode = Mode::per_component;
    f.K = K;
    f.component_assignment = std::move(assignment);
    const double gap = domain.as_annulus().r_outer - domain.as_annulus().r_inner;
    f.delta_sep = delta_sep.value_or(gap / 4.0);
    return f;
}

FeasibleSet FeasibleSet::free_set(const Domain& domain, double K, std::optional<double> delta_sep) {
    if (!(K > 1)) throw ConfigError("FeasibleSet: K must exceed 1");
    FeasibleSet f;
    f.mode = Mode::free_points;
    f.K = K;
    f.delta_sep = delta_sep.value_or(domain.boundary_radius(0.0) / 4.0);
    return f;
}

double FeasibleSet::margin(const Domain& domain, const std::vector<Point>& xi,
                           double lambda) const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < xi.size(); ++j) {
        if (!domain.contains(xi[j])) return -1.0;
        const double d = domain.distance_to_boundary(xi[j]);
        if (d <= 0) return -1.0;
        const double ld = lambda * d;
        m = std::min(m, ld - 1.0 / K);
        m = std::min(m, K - ld);
        if (mode == Mode::per_component) {
            const Point proj = domain.boundary_projection(xi[j]).point;
            if (domain.boundary_component_of(proj, 1e-6) != component_assignment[j]) return -1.0;
        }
        if (mode == Mode::axis_symmetric && std::abs(xi[j].y()) > 1e-14) return -1.0;
        for (size_t i = 0; i < j; ++i)
            m = std::min(m, ((xi[i] - xi[j]).norm() - delta_sep) * lambda);
    }
    return m;
}

bool FeasibleSet::contains(const Domain& domain, const std::vector<Point>& xi,
                           double lambda) const {
    return margin(domain, xi, lambda) > 0.0;
}

double phi_m(const ConcentrationConfig& config, const GreenEngine& green) {
    config.validate(green.domain());
    const int m = config.m();
    double phi = 0.0;
    for (int j = 0; j < m; ++j) {
        phi += green.robin_function(config.xi[j]);
        for (int i = 0; i < m; ++i) {
            if (i == j) continue;
            phi += config.spins.a[i] * config.spins.a[j] * green.green(config.xi[i], config.xi[j]);
        }
    }
    return phi;
}

MassReport compute_masses(ConcentrationConfig& config, const GreenEngine& green, MassRule rule,
                          double delta_bound) {
    config.validate(green.domain());
    const int m = config.m();
    MassReport report;
    report.delta_bound = delta_bound;
    report.mu.resize(m);
    for (int j = 0; j < m; ++j) {
        double rhs = green.robin_function(config.xi[j]) + 4.0 * std::log(config.lambda);
        for (int i = 0; i < m; ++i) {
            if (i == j) continue;
            const double w = rule == MassRule::as_written
                                 ? config.spins.a[i]
                                 : config.spins.a[i] * config.spins.a[j];
            rhs += w * green.green(config.xi[i], config.xi[j]);
        }
        if (rhs > 700.0)
            throw MassOverflowError("compute_masses: log(8 mu^2) = " + std::to_string(rhs) +
                                    " overflows (points nearly coincident with attracting spins?)");
        report.mu[j] = std::sqrt(std::exp(rhs) / 8.0);
        if (!(report.mu[j] > delta_bound && report.mu[j] < 1.0 / delta_bound))
            report.bounds_ok = false;
    }
    config.mu = report.mu;
    config.masses_computed = true;
    return report;
}

std::vector<Point> grad_phi_m(const ConcentrationConfig& config, const GreenEngine& green) {
    config.validate(green.domain());
    const Domain& domain = green.domain();
    double dmin = std::numeric_limits<double>::infinity();
    for (const Point& p : config.xi) dmin = std::min(dmin, domain.distance_to_boundary(p));
    std::vector<Point> grad(config.m(), Point(0, 0));
    for (int j = 0; j < config.m(); ++j) {
        for (int c = 0; c < 2; ++c) {
            double step = 1e-3 * dmin;
            Point e = c == 0 ? Point(1, 0) : Point(0, 1);
            while (step >= 1e-8) {
                const Point up = config.xi[j] + step * e;
                const Point dn = config.xi[j] - step * e;
                if (domain.contains(up) && domain.contains(dn) &&
                    domain.distance_to_boundary(up) > 0 && domain.distance_to_boundary(dn) > 0)
                    break;
                step *= 0.5;
            }
            if (step < 1e-8)
                throw DomainError("grad_phi_m: finite-difference step could not stay inside Omega");
            ConcentrationConfig up = config, dn = config;
            up.xi[j] += step * e;
            dn.xi[j] -= step * e;
            grad[j][c] = (phi_m(up, green) - phi_m(dn, green)) / (2.0 * step);
        }
    }
    return grad;
}

// ---------------------------------------------------------------------------
// minimize
// ---------------------------------------------------------------------------

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Parametrization {
    const Domain* domain;
    const FeasibleSet* feasible;
    int m;

    int dim() const {
        return feasible->mode == FeasibleSet::Mode::axis_symmetric ? m : 2 * m;
    }
    std::vector<Point> to_points(const std::vector<double>& p) const {
        std::vector<Point> xi(m);
        if (feasible->mode == FeasibleSet::Mode::axis_symmetric) {
            for (int j = 0; j < m; ++j) xi[j] = Point(p[j], 0.0);
        } else {
            for (int j = 0; j < m; ++j) xi[j] = Point(p[2 * j], p[2 * j + 1]);
        }
        return xi;
    }
    std::vector<double> from_points(const std::vector<Point>& xi) const {
        std::vector<double> p(dim());
        if (feasible->mode == FeasibleSet::Mode::axis_symmetric) {
            for (int j = 0; j < m; ++j) p[j] = xi[j].x();
        } else {
            for (int j = 0; j < m; ++j) {
                p[2 * j] = xi[j].x();
                p[2 * j + 1] = xi[j].y();
            }
        }
        return p;
    }
};

/// Point at distance d inward from the boundary anchor at angle phi.
Point fiber_point(const Domain& domain, int component, double phi, double d) {
    Point b;
    if (component == 1) {
        b = domain.inner_radius() * Point(std::cos(phi), std::sin(phi));
    } else {
        b = domain.boundary_radius(phi) * Point(std::cos(phi), std::sin(phi));
    }
    const Point nu = domain.outward_normal(b, 1e-9);
    return b - d * nu;
}

} // namespace

MinimizeResult minimize(const Domain& domain, const SpinConfig& spins, const FeasibleSet& feasible,
                        double lambda, const GreenEngine& green, const MinimizeOptions& options) {
    const int m = spins.m();
    if (feasible.mode == FeasibleSet::Mode::per_component &&
        static_cast<int>(feasible.component_assignment.size()) != m)
        throw ConfigError("minimize: component assignment size must equal m");

    Parametrization par{&domain, &feasible, m};
    const double d_star = theta0().theta0 / lambda;

    auto objective = [&](const std::vector<double>& p) -> double {
        const std::vector<Point> xi = par.to_points(p);
        if (!feasible.contains(domain, xi, lambda)) return std::numeric_limits<double>::infinity();
        ConcentrationConfig cfg(xi, spins, lambda);
        return phi_m(cfg, green);
    };

    // Multi-start seeds: normal fibers at lambda d = theta0 over spread anchors.
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> seeds;
    for (int s = 0; s < 3 * options.n_starts && static_cast<int>(seeds.size()) < options.n_starts;
         ++s) {
        std::vector<Point> xi(m);
        const double jitter = s == 0 ? 0.0 : 0.35;
        bool ok = true;
        if (feasible.mode == FeasibleSet::Mode::axis_symmetric) {
            const auto [a, b] = domain.axis_chord();
            for (int j = 0; j < m; ++j) {
                const double d = d_star * std::exp(jitter * (2.0 * unif(rng) - 1.0));
                xi[j] = (j % 2 == 0) ? Point(a + d, 0.0) : Point(b - d, 0.0);
                if (m > 2) xi[j].x() += 0.05 * (j / 2) * (j % 2 == 0 ? 1 : -1);
            }
        } else {
            for (int j = 0; j < m; ++j) {
                const int comp = feasible.mode == FeasibleSet::Mode::per_component
                                     ? feasible.component_assignment[j]
                                     : 0;
                const double phi =
                    two_pi * (static_cast<double>(j) / m + (s == 0 ? 0.0 : 0.5 * unif(rng)));
                const double d = d_star * std::exp(jitter * (2.0 * unif(rng) - 1.0));
                xi[j] = fiber_point(domain, comp, phi, d);
            }
        }
        ok = feasible.contains(domain, xi, lambda);
        if (ok) seeds.push_back(par.from_points(xi));
    }
    if (seeds.empty())
        throw ConfigError("minimize: all multi-start seeds are infeasible; check K/delta_sep");

    MinimizeResult best{ConcentrationConfig(par.to_points(seeds[0]), spins, lambda),
                        std::numeric_limits<double>::infinity(), false, 0, {}};

    for (size_t s = 0; s < seeds.size(); ++s) {
        // Nelder-Mead.
        const int n = par.dim();
        const double step0 = std::max(0.25 * d_star, 1e-6);
        std::vector<std::vector<double>> simplex(n + 1, seeds[s]);
        for (int i = 0; i < n; ++i) simplex[i + 1][i] += step0;
        std::vector<double> fvals(n + 1);
        for (int i = 0; i <= n; ++i) fvals[i] = objective(simplex[i]);

        std::vector<TraceRow> trace;
        auto record = [&](int iter, const std::vector<double>& p, double f) {
            if (!std::isfinite(f)) return;
            TraceRow row;
            row.start = static_cast<int>(s);
            row.iteration = iter;
            row.xi = par.to_points(p);
            row.phi = f;
            row.margin = feasible.margin(domain, row.xi, lambda);
            trace.push_back(std::move(row));
        };

        for (int iter = 0; iter < options.max_iterations; ++iter) {
            // order
            std::vector<int> idx(n + 1);
            for (int i = 0; i <= n; ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fvals[a] < fvals[b]; });
            std::vector<std::vector<double>> sx(n + 1);
            std::vector<double> fx(n + 1);
            for (int i = 0; i <= n; ++i) {
                sx[i] = simplex[idx[i]];
                fx[i] = fvals[idx[i]];
            }
            simplex = sx;
            fvals = fx;
            record(iter, simplex[0], fvals[0]);

            double spread = 0.0;
            for (int i = 0; i < n; ++i)
                spread = std::max(spread, std::abs(simplex[n][i] - simplex[0][i]));
            if (std::isfinite(fvals[n]) && fvals[n] - fvals[0] < options.f_tol &&
                spread < options.x_tol)
                break;

            std::vector<double> centroid(n, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;

            auto blend = [&](double coef) {
                std::vector<double> p(n);
                for (int j = 0; j < n; ++j)
                    p[j] = centroid[j] + coef * (simplex[n][j] - centroid[j]);
                return p;
            };
            const std::vector<double> xr = blend(-1.0);
            const double fr = objective(xr);
            if (fr < fvals[0]) {
                const std::vector<double> xe = blend(-2.0);
                const double fe = objective(xe);
                if (fe < fr) { simplex[n] = xe; fvals[n] = fe; }
                else { simplex[n] = xr; fvals[n] = fr; }
            } else if (fr < fvals[n - 1]) {
                simplex[n] = xr;
                fvals[n] = fr;
            } else {
                const std::vector<double> xc = blend(fr < fvals[n] ? -0.5 : 0.5);
                const double fc = objective(xc);
                if (fc < std::min(fr, fvals[n])) {
                    simplex[n] = xc;
                    fvals[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        for (int j = 0; j < n; ++j)
                            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                        fvals[i] = objective(simplex[i]);
                    }
                }
            }
        }

        // Coordinate polish (golden section per coordinate).
        int ibest = 0;
        for (int i = 1; i <= n; ++i)
            if (fvals[i] < fvals[ibest]) ibest = i;
        std::vector<double> p = simplex[ibest];
        double fbest = fvals[ibest];
        const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int round = 0; round < 3; ++round) {
            for (int c = 0; c < n; ++c) {
                double lo = p[c] - 0.5 * d_star, hi = p[c] + 0.5 * d_star;
                auto f1d = [&](double v) {
                    std::vector<double> q = p;
                    q[c] = v;
                    return objective(q);
                };
                double a = lo, b = hi;
                double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
                double f1 = f1d(x1), f2 = f1d(x2);
                for (int it = 0; it < 60; ++it) {
                    if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - invphi * (b - a); f1 = f1d(x1); }
                    else { a = x1; x1 = x2; f1 = f2; x2 = a + invphi * (b - a); f2 = f1d(x2); }
                }
                const double v = 0.5 * (a + b);
                const double fv = f1d(v);
                if (fv < fbest) { p[c] = v; fbest = fv; }
            }
        }
        record(options.max_iterations, p, fbest);

        if (fbest < best.phi) {
            best.phi = fbest;
            best.config = ConcentrationConfig(par.to_points(p), spins, lambda);
            best.best_start = static_cast<int>(s);
        }
        for (auto& row : trace) best.trace.push_back(row);
    }

    if (!std::isfinite(best.phi))
        throw SolverError("minimize: no feasible minimum found from any start");
    const double mg = feasible.margin(domain, best.config.xi, lambda);
    best.boundary_minimum_warning = mg < 1e-4; // margin is in lambda*d units
    std::sort(best.trace.begin(), best.trace.end(), [](const TraceRow& a, const TraceRow& b) {
        return a.start != b.start ? a.start < b.start : a.iteration < b.iteration;
    });
    return best;
}

} // namespace sinhp
