#include "sinhp/ansatz.hpp"

#include "sinhp/errors.hpp"

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

Params::Params(double eps, double lam, double alpha_, double eps0_)
    : epsilon(eps), lambda(lam), alpha(alpha_), eps0(eps0_) {
    if (!(epsilon > 0 && epsilon < 1)) throw ConfigError("Params: epsilon must lie in (0,1)");
    if (!(lambda > 1)) throw ConfigError("Params: lambda must exceed 1");
}

double bubble(double mu, double rho, const Point& xi, double eps, const Point& x) {
    if (!(mu > 0 && rho > 0 && eps > 0)) throw ConfigError("bubble: mu, rho, eps must be positive");
    const double r2 = (x - xi).squaredNorm();
    return std::log(8.0 * mu * mu) - 2.0 * std::log(mu * mu * rho * rho + r2) +
           2.0 * std::log(rho / eps);
}

Point bubble_gradient(double mu, double rho, const Point& xi, const Point& x) {
    const Point z = x - xi;
    return -4.0 * z / (mu * mu * rho * rho + z.squaredNorm());
}

double bubble_eps2_exp(double mu, double rho, const Point& xi, double /*eps*/, const Point& x) {
    const double den = mu * mu * rho * rho + (x - xi).squaredNorm();
    return 8.0 * mu * mu * rho * rho / (den * den);
}

Field corrector(const std::shared_ptr<const Grid>& grid, double lambda, double mu, double rho,
                const Point& xi, double eps) {
    RobinOperator op(grid, lambda);
    Field g(grid);
    const Domain& dom = grid->domain();
    for (int idx : grid->boundary_indices()) {
        const Point& xb = grid->node(idx);
        const Point nu = dom.outward_normal(xb, 1e-6);
        g.values[idx] =
            -(bubble_gradient(mu, rho, xi, xb).dot(nu) + lambda * bubble(mu, rho, xi, eps, xb));
    }
    Field zero(grid);
    return op.solve(zero, g);
}

double AnsatzBundle::corrector_at(int j, const Point& x) const {
    if (spectral_correctors) return engine->regular_part(x, config.xi[j]) - corrector_shift[j];
    return field_interpolate(H[j], x);
}

double AnsatzBundle::U_at(const Point& x) const {
    double u = 0.0;
    const double rho = params.rho();
    for (int j = 0; j < config.m(); ++j) {
        u += config.spins.a[j] *
             (bubble(config.mu[j], rho, config.xi[j], params.epsilon, x) + corrector_at(j, x));
    }
    return u;
}

AnsatzBundle build_ansatz(const std::shared_ptr<const Grid>& grid,
                          const ConcentrationConfig& config, const Params& params,
                          std::shared_ptr<const GreenEngine> engine) {
    if (!config.masses_computed)
        throw ConfigError("build_ansatz: config must carry finalized masses (compute_masses)");
    if (std::abs(config.lambda - params.lambda) > 1e-12 * params.lambda)
        throw ConfigError("build_ansatz: config.lambda and params.lambda disagree");
    config.validate(grid->domain());

    AnsatzBundle b{grid,
                   engine ? engine : make_green_engine(grid->domain(), params.lambda, grid),
                   config,
                   params,
                   {},
                   {},
                   Field(grid),
                   false,
                   {},
                   {},
                   Field(grid),
                   0.0};
    const int m = config.m();
    const double rho = params.rho();
    const Domain& dom = grid->domain();

    // Disk/annulus correctors come from the spectral Green engine:
    // H_j = H_lambda(., xi_j) - log(8 mu_j^2) - 2 log(rho/eps), exact up to the
    // O((mu rho / d)^2) Robin data of the regularized logarithm. Star domains
    // use the discrete Robin solve.
    b.spectral_correctors = !dom.is_star();
    b.w.reserve(m);
    b.H.reserve(m);
    for (int j = 0; j < m; ++j) {
        Field wj(grid);
        for (int i = 0; i < grid->n_nodes(); ++i)
            wj.values[i] = bubble(config.mu[j], rho, config.xi[j], params.epsilon, grid->node(i));
        b.w.push_back(std::move(wj));

        if (b.spectral_correctors) {
            const double shift = std::log(8.0 * config.mu[j] * config.mu[j]) +
                                 2.0 * std::log(rho / params.epsilon);
            b.corrector_shift.push_back(shift);
            Field hj = b.engine->materialize(grid, config.xi[j]);
            hj.values.array() -= shift;
            b.H.push_back(std::move(hj));
        } else {
            b.corrector_shift.push_back(0.0);
            b.H.push_back(
                corrector(grid, params.lambda, config.mu[j], rho, config.xi[j], params.epsilon));
        }
    }

    b.U = Field(grid);
    for (int j = 0; j < m; ++j)
        b.U.values += config.spins.a[j] * (b.w[j].values + b.H[j].values);

    // (2.10)-style diagnostic: U_j vs G(., xi_j) on a compact away from xi_j.
    const double probe_sep = 0.2 * dom.boundary_radius(0.0);
    b.probe_gap.assign(m, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < grid->n_nodes(); ++i) {
            const Point& x = grid->node(i);
            if ((x - config.xi[j]).norm() < probe_sep) continue;
            const double uj = b.w[j].values[i] + b.H[j].values[i];
            const double g = b.engine->green(x, config.xi[j]);
            b.probe_gap[j] = std::max(b.probe_gap[j], std::abs(uj - g));
        }
    }

    // Robin defect of U on the boundary (should vanish to solver accuracy).
    b.robin_defect = Field(grid);
    for (int idx : grid->boundary_indices()) {
        const Point& xb = grid->node(idx);
        const Point nu = dom.outward_normal(xb, 1e-6);
        double defect = params.lambda * b.U.values[idx];
        for (int j = 0; j < m; ++j) {
            defect += config.spins.a[j] *
                      bubble_gradient(config.mu[j], rho, config.xi[j], xb).dot(nu);
            if (b.spectral_correctors) {
                defect +=
                    config.spins.a[j] * b.engine->regular_part_gradient(xb, config.xi[j]).dot(nu);
            } else {
                // one-sided second-order normal difference of the solved corrector
                const double h = 0.5 * grid->du();
                const double t = std::atan2(xb.y(), xb.x());
                const bool outer = grid->boundary_component(idx) == 0;
                const double u_b = outer ? 1.0 : 0.0;
                auto val = [&](double uu) {
                    const double c = grid->radius_map(uu, t);
                    return field_interpolate(b.H[j], Point(c * std::cos(t), c * std::sin(t)));
                };
                const double sgn = outer ? 1.0 : -1.0;
                const double cu = grid->radius_map_du(u_b, t);
                const double d1 = (3.0 * val(u_b) - 4.0 * val(u_b - sgn * h) +
                                   val(u_b - 2.0 * sgn * h)) /
                                  (2.0 * h * cu) * sgn;
                defect += config.spins.a[j] * d1;
            }
        }
        b.robin_defect.values[idx] = defect;
        b.max_boundary_defect = std::max(b.max_boundary_defect, std::abs(defect));
    }
    return b;
}

double potential_W(const ConcentrationConfig& config, double rho, const Point& y) {
    double w = 0.0;
    for (int j = 0; j < config.m(); ++j) {
        const double mu = config.mu.empty() ? 1.0 : config.mu[j];
        const double den = mu * mu + (y - config.xi[j] / rho).squaredNorm();
        w += 8.0 * mu * mu / (den * den);
    }
    return w;
}

double kernel_Z(int i, int j, const ConcentrationConfig& config, double rho, const Point& y) {
    if (i < 0 || i > 2) throw ConfigError("kernel_Z: i must be 0, 1 or 2");
    if (j < 0 || j >= config.m()) throw ConfigError("kernel_Z: bubble index out of range");
    const double mu = config.mu.empty() ? 1.0 : config.mu[j];
    const Point z = y - config.xi[j] / rho;
    const double den = mu * mu + z.squaredNorm();
    if (i == 0) return (mu * mu - z.squaredNorm()) / den;
    return 4.0 * mu * z[i - 1] / den;
}

double residual_at(const AnsatzBundle& bundle, const Point& y) {
    const double rho = bundle.params.rho();
    const Point x = rho * y;
    const double eps = bundle.params.epsilon;
    double lap_U = 0.0;
    for (int j = 0; j < bundle.config.m(); ++j)
        lap_U -= bundle.config.spins.a[j] *
                 bubble_eps2_exp(bundle.config.mu[j], rho, bundle.config.xi[j], eps, x);
    const double u = bundle.U_at(x);
    return rho * rho * (lap_U + eps2_two_sinh(eps, u));
}

Field residual(const AnsatzBundle& bundle) {
    const auto& grid = bundle.grid;
    const double rho = bundle.params.rho();
    const double eps = bundle.params.epsilon;
    Field r(grid);
    for (int i : grid->interior_indices()) {
        const Point& x = grid->node(i);
        double lap_U = 0.0;
        for (int j = 0; j < bundle.config.m(); ++j)
            lap_U -= bundle.config.spins.a[j] *
                     bubble_eps2_exp(bundle.config.mu[j], rho, bundle.config.xi[j], eps, x);
        r.values[i] = rho * rho * (lap_U + eps2_two_sinh(eps, bundle.U.values[i]));
    }
    // Boundary rows report the Robin defect of U (computed at build time).
    for (int idx : grid->boundary_indices()) r.values[idx] = bundle.robin_defect.values[idx];
    return r;
}

namespace {

double star_weight(const ConcentrationConfig& config, double rho, double sigma, const Point& y) {
    double w = rho * rho;
    for (int j = 0; j < config.m(); ++j) {
        const double d = (y - config.xi[j] / rho).norm();
        w += std::pow(1.0 + d, -2.0 - sigma);
    }
    return w;
}

} // namespace

double star_norm(const Field& f, const ConcentrationConfig& config, double rho, double sigma) {
    if (!(sigma > 0 && sigma < 1)) throw ConfigError("star_norm: sigma must lie in (0,1)");
    double best = 0.0;
    for (int i = 0; i < f.size(); ++i) {
        const Point y = f.grid->node(i) / rho;
        best = std::max(best, std::abs(f.values[i]) / star_weight(config, rho, sigma, y));
    }
    return best;
}

double residual_star_norm(const AnsatzBundle& bundle, double sigma) {
    const double rho = bundle.params.rho();
    const Field r = residual(bundle);
    double best = 0.0;
    for (int i : bundle.grid->interior_indices()) {
        const Point y = bundle.grid->node(i) / rho;
        best = std::max(best,
                        std::abs(r.values[i]) / star_weight(bundle.config, rho, sigma, y));
    }
    // Near-field cloud: the weighted sup is attained at |y - xi'| = O(1), far
    // below the grid scale; the residual there is analytic in the bubbles.
    const Domain& dom = bundle.grid->domain();
    for (int j = 0; j < bundle.config.m(); ++j) {
        const Point xi = bundle.config.xi[j];
        const double d = dom.distance_to_boundary(xi);
        const double L_max = 0.45 * d / rho;
        const double L_min = 1e-2;
        const int nL = 160, nA = 8;
        for (int a = 0; a < nA; ++a) {
            const double phi = 2.0 * std::numbers::pi * a / nA;
            const Point dir(std::cos(phi), std::sin(phi));
            for (int l = 0; l < nL; ++l) {
                const double L =
                    L_min * std::pow(L_max / L_min, static_cast<double>(l) / (nL - 1));
                const Point y = xi / rho + L * dir;
                best = std::max(best, std::abs(residual_at(bundle, y)) /
                                          star_weight(bundle.config, rho, sigma, y));
            }
        }
    }
    return best;
}

namespace {

Field scaled_laplacian(const AnsatzBundle& bundle, const Field& phi) {
    RobinOperator op(bundle.grid, bundle.params.lambda);
    Field Aphi = op.apply(phi);
    Field out(bundle.grid);
    const double rho2 = bundle.params.rho() * bundle.params.rho();
    for (int i : bundle.grid->interior_indices()) out.values[i] = -rho2 * Aphi.values[i];
    for (int idx : bundle.grid->boundary_indices()) out.values[idx] = Aphi.values[idx];
    return out;
}

} // namespace

Field linearized_apply(const AnsatzBundle& bundle, const Field& phi) {
    Field out = scaled_laplacian(bundle, phi);
    const double rho = bundle.params.rho();
    for (int i : bundle.grid->interior_indices())
        out.values[i] += potential_W(bundle.config, rho, bundle.grid->node(i) / rho) * phi.values[i];
    return out;
}

Field linearized_full_apply(const AnsatzBundle& bundle, const Field& phi) {
    Field out = scaled_laplacian(bundle, phi);
    const double rho = bundle.params.rho();
    for (int i : bundle.grid->interior_indices())
        out.values[i] += rho * rho *
                         eps2_two_cosh(bundle.params.epsilon, bundle.U.values[i]) * phi.values[i];
    return out;
}

Field gap_apply(const AnsatzBundle& bundle, const Field& phi) {
    Field out(bundle.grid);
    const double rho = bundle.params.rho();
    for (int i = 0; i < out.size(); ++i) {
        const double full = rho * rho * eps2_two_cosh(bundle.params.epsilon, bundle.U.values[i]);
        out.values[i] =
            (full - potential_W(bundle.config, rho, bundle.grid->node(i) / rho)) * phi.values[i];
    }
    return out;
}

Field nonlinearity_N(const AnsatzBundle& bundle, const Field& phi) {
    Field out(bundle.grid);
    const double rho = bundle.params.rho();
    const double eps = bundle.params.epsilon;
    const double le = 2.0 * (std::log(eps) + std::log(rho));
    for (int i = 0; i < out.size(); ++i) {
        const double V = bundle.U.values[i];
        const double p = phi.values[i];
        // (eps rho)^2 e^{+-V} with the prefactor folded into the exponent
        const double ep = std::exp(le + V);
        const double em = std::exp(le - V);
        out.values[i] = ep * (std::expm1(p) - p) - em * (std::expm1(-p) + p);
    }
    return out;
}

double corrector_gap(const std::shared_ptr<const Grid>& grid, const GreenEngine& engine,
                     const ConcentrationConfig& config, const Params& params, int j) {
    if (!config.masses_computed) throw ConfigError("corrector_gap: masses not computed");
    const double rho = params.rho();
    const Field Hj = corrector(grid, params.lambda, config.mu[j], rho, config.xi[j], params.epsilon);
    const double shift =
        std::log(8.0 * config.mu[j] * config.mu[j]) - 4.0 * std::log(params.lambda);
    double gap = 0.0;
    for (int i = 0; i < grid->n_nodes(); ++i) {
        const double target = engine.regular_part(grid->node(i), config.xi[j]) - shift;
        gap = std::max(gap, std::abs(Hj.values[i] - target));
    }
    return gap;
}

} // namespace sinhp
