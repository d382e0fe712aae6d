#include "sinhp/green.hpp"

#include "sinhp/errors.hpp"
#include "sinhp/special.hpp"

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

namespace sinhp {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_angle(double t) {
    t = std::fmod(t, two_pi);
    if (t < 0) t += two_pi;
    return t;
}
} // namespace

double fundamental(const Point& x, const Point& y) {
    const double r = (x - y).norm();
    if (r == 0.0) throw SingularityError("fundamental: x = y");
    return -4.0 * std::log(r);
}

double field_interpolate(const Field& f, const Point& x) {
    const Grid& g = *f.grid;
    const double t = wrap_angle(std::atan2(x.y(), x.x()));
    const double r = x.norm();
    const int nt = g.n_angular();
    const double dt = g.dt();
    const double ft = t / dt;
    int k0 = static_cast<int>(std::floor(ft));
    const double wt = ft - k0;
    k0 %= nt;
    const int k1 = (k0 + 1) % nt;

    auto u_at = [&](double tt) {
        double lo = 0.0, hi = 1.0;
        if (r <= g.radius_map(0.0, tt)) return 0.0;
        if (r >= g.radius_map(1.0, tt)) return 1.0;
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g.radius_map(mid, tt) < r ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    auto column_value = [&](int k, double tt) {
        const double fu = u_at(tt) / g.du();
        int i0 = static_cast<int>(std::floor(fu));
        double wu = fu - i0;
        if (i0 >= g.n_radial()) { i0 = g.n_radial() - 1; wu = 1.0; }
        if (i0 < 0) { i0 = 0; wu = 0.0; }
        const double v0 = f.values[g.node_index(i0, k)];
        const double v1 = f.values[g.node_index(i0 + 1, k)];
        return (1.0 - wu) * v0 + wu * v1;
    };

    const double c0 = column_value(k0, g.t_of(k0));
    const double c1 = column_value(k1, g.t_of(k1));
    return (1.0 - wt) * c0 + wt * c1;
}

GreenEngine::GreenEngine(Domain domain, double lambda)
    : domain_(std::move(domain)), lambda_(lambda) {
    if (!(lambda > 0)) throw ConfigError("GreenEngine: lambda must be positive");
}

Point GreenEngine::regular_part_gradient(const Point& x, const Point& xi) const {
    const double h = 1e-6 * std::max(1.0, x.norm());
    const Point ex(1, 0), ey(0, 1);
    return Point(
        (regular_part(x + h * ex, xi) - regular_part(x - h * ex, xi)) / (2 * h),
        (regular_part(x + h * ey, xi) - regular_part(x - h * ey, xi)) / (2 * h));
}

double GreenEngine::green(const Point& x, const Point& y) const {
    return fundamental(x, y) + regular_part(x, y);
}

double GreenEngine::robin_function(const Point& xi) const { return regular_part(xi, xi); }

Field GreenEngine::materialize(const std::shared_ptr<const Grid>& grid, const Point& xi) const {
    Field f(grid);
    for (int i = 0; i < grid->n_nodes(); ++i) f.values[i] = regular_part(grid->node(i), xi);
    return f;
}

// ---------------------------------------------------------------------------
// Spectral disk engine
// ---------------------------------------------------------------------------

namespace {

class DiskGreenEngine final : public GreenEngine {
public:
    DiskGreenEngine(Domain d, double lambda)
        : GreenEngine(std::move(d), lambda), R_(domain_.as_disk().radius) {}

    std::string backend_name() const override { return "spectral-disk"; }

    double regular_part(const Point& x, const Point& xi) const override {
        check_source(xi);
        const double lamh = lambda_ * R_;
        const double r = x.norm() / R_, s = xi.norm() / R_;
        const double q = r * s;
        double acc = 4.0 / lamh;
        if (q > 0) {
            const int K = mode_count(q);
            const double dth = std::atan2(x.y(), x.x()) - std::atan2(xi.y(), xi.x());
            const std::complex<double> rot(std::cos(dth), std::sin(dth));
            std::complex<double> zk(1.0, 0.0);
            double qk = 1.0;
            for (int k = 1; k <= K; ++k) {
                zk *= rot;
                qk *= q;
                const double ak = 4.0 * (k - lamh) / (k * (k + lamh));
                acc += ak * qk * zk.real();
                if (qk < 1e-18) break;
            }
        }
        return acc + 4.0 * std::log(R_);
    }

    Point regular_part_gradient(const Point& x, const Point& xi) const override {
        check_source(xi);
        const double lamh = lambda_ * R_;
        const double r = x.norm() / R_, s = xi.norm() / R_;
        if (r < 1e-14 || s < 1e-14) return Point(0, 0);
        const double th = std::atan2(x.y(), x.x());
        const double dth = th - std::atan2(xi.y(), xi.x());
        const std::complex<double> rot(std::cos(dth), std::sin(dth));
        std::complex<double> zk(1.0, 0.0);
        double dH_dr = 0.0, dH_dth = 0.0; // unit-disk chart
        const int K = mode_count(r * s);
        double rk = 1.0, sk = 1.0;
        for (int k = 1; k <= K; ++k) {
            zk *= rot;
            rk *= r;
            sk *= s;
            const double ak = 4.0 * (k - lamh) / (k * (k + lamh)) * sk;
            dH_dr += ak * k * (rk / r) * zk.real();
            dH_dth += -ak * k * rk * zk.imag();
            if (rk * sk < 1e-18) break;
        }
        // d/dx = e_r dH/dr / R + e_t dH/dth / (R r)
        const Point er(std::cos(th), std::sin(th)), et(-std::sin(th), std::cos(th));
        return er * (dH_dr / R_) + et * (dH_dth / (R_ * r));
    }

private:
    void check_source(const Point& xi) const {
        if (xi.norm() >= R_ * (1.0 - 1e-12))
            throw ResolutionError("disk Green engine: source on or outside the boundary");
    }
    static int mode_count(double q) {
        if (q <= 0) return 0;
        if (q >= 1.0 - 1e-12) q = 1.0 - 1e-12;
        const int K = static_cast<int>(std::ceil(40.0 / -std::log(q)));
        return std::min(std::max(K, 32), 4'000'000);
    }
    double R_;
};

// ---------------------------------------------------------------------------
// Spectral annulus engine
// ---------------------------------------------------------------------------

class AnnulusGreenEngine final : public GreenEngine {
public:
    AnnulusGreenEngine(Domain d, double lambda)
        : GreenEngine(std::move(d), lambda),
          a_(domain_.as_annulus().r_inner),
          b_(domain_.as_annulus().r_outer) {}

    std::string backend_name() const override { return "spectral-annulus"; }

    double regular_part(const Point& x, const Point& xi) const override {
        const double s = xi.norm();
        if (s <= a_ * (1.0 + 1e-12) || s >= b_ * (1.0 - 1e-12))
            throw ResolutionError("annulus Green engine: source on or outside the boundary");
        const double r = x.norm();
        const double lam = lambda_;

        // mode 0: H0 = alpha0 + beta0 log r
        double m00 = lam, m01 = 1.0 / b_ + lam * std::log(b_);
        double m10 = lam, m11 = -1.0 / a_ + lam * std::log(a_);
        double g0 = 4.0 / b_ + 4.0 * lam * std::log(b_); // -R_out Gamma_0
        double g1 = 4.0 * lam * std::log(s);             // -R_in Gamma_0
        double det = m00 * m11 - m01 * m10;
        const double alpha0 = (g0 * m11 - m01 * g1) / det;
        const double beta0 = (m00 * g1 - g0 * m10) / det;
        double acc = alpha0 + beta0 * std::log(r);

        const double dth = std::atan2(x.y(), x.x()) - std::atan2(xi.y(), xi.x());
        const std::complex<double> rot(std::cos(dth), std::sin(dth));
        std::complex<double> zk(1.0, 0.0);
        const int K = mode_count(r, s);
        double sb = 1.0, as = 1.0, rb = 1.0, ar = 1.0, ab = 1.0;
        const double f_sb = s / b_, f_as = a_ / s, f_rb = r / b_, f_ar = a_ / r, f_ab = a_ / b_;
        for (int k = 1; k <= K; ++k) {
            zk *= rot;
            sb *= f_sb;
            as *= f_as;
            rb *= f_rb;
            ar *= f_ar;
            ab *= f_ab;
            // Robin rows for T_k = (r/b)^k, S_k = (a/r)^k and Gamma data
            const double M00 = static_cast<double>(k) / b_ + lam;
            const double M01 = (lam - static_cast<double>(k) / b_) * ab;
            const double M10 = (lam - static_cast<double>(k) / a_) * ab;
            const double M11 = static_cast<double>(k) / a_ + lam;
            const double G0 = 4.0 * sb * (1.0 / b_ - lam / k);
            const double G1 = 4.0 * as * (1.0 / a_ - lam / k);
            const double D = M00 * M11 - M01 * M10;
            const double ak = (G0 * M11 - M01 * G1) / D;
            const double bk = (M00 * G1 - G0 * M10) / D;
            acc += (ak * rb + bk * ar) * zk.real();
            // break on the geometric envelope, not the (sign-changing) coefficients
            if (sb * rb + as * ar < 1e-20) break;
        }
        return acc;
    }

private:
    int mode_count(double r, double s) const {
        const double q1 = (s / b_) * (r / b_);
        const double q2 = (a_ / s) * (a_ / r);
        const double q = std::max(q1, q2);
        if (q >= 1.0 - 1e-12) return 4'000'000;
        const int K = static_cast<int>(std::ceil(40.0 / -std::log(q)));
        return std::min(std::max(K, 32), 4'000'000);
    }
    double a_, b_;
};

// ---------------------------------------------------------------------------
// Finite-difference engine (any domain; production path for star)
// ---------------------------------------------------------------------------

class FdGreenEngine final : public GreenEngine {
public:
    FdGreenEngine(Domain d, double lambda, std::shared_ptr<const Grid> grid)
        : GreenEngine(std::move(d), lambda),
          grid_(std::move(grid)),
          op_(std::make_shared<RobinOperator>(grid_, lambda)) {}

    std::string backend_name() const override { return "fd"; }

    double regular_part(const Point& x, const Point& xi) const override {
        return field_interpolate(field_for(xi), x);
    }

    Field materialize(const std::shared_ptr<const Grid>& grid, const Point& xi) const override {
        if (grid.get() == grid_.get()) return field_for(xi);
        Field out(grid);
        const Field& f = field_for(xi);
        for (int i = 0; i < grid->n_nodes(); ++i)
            out.values[i] = field_interpolate(f, grid->node(i));
        return out;
    }

    const std::shared_ptr<const Grid>& grid() const { return grid_; }

private:
    const Field& field_for(const Point& xi) const {
        std::lock_guard<std::mutex> lock(mtx_);
        for (const auto& [pt, fld] : cache_)
            if ((pt - xi).norm() < 1e-15) return fld;
        Field g(grid_);
        for (int idx : grid_->boundary_indices()) {
            const Point& xb = grid_->node(idx);
            const Point nu = domain_.outward_normal(xb, 1e-6);
            const Point z = xb - xi;
            const double r2 = z.squaredNorm();
            // g = -R_lambda Gamma = 4 (x-xi).nu / |x-xi|^2 + 4 lambda log |x-xi|
            g.values[idx] = 4.0 * z.dot(nu) / r2 + 4.0 * lambda_ * 0.5 * std::log(r2);
        }
        Field zero(grid_);
        Field h = op_->solve(zero, g);
        cache_.emplace_back(xi, std::move(h));
        if (cache_.size() > 64) cache_.erase(cache_.begin());
        return cache_.back().second;
    }

    std::shared_ptr<const Grid> grid_;
    std::shared_ptr<RobinOperator> op_;
    mutable std::mutex mtx_;
    mutable std::vector<std::pair<Point, Field>> cache_;
};

} // namespace

std::shared_ptr<const GreenEngine> make_green_engine(const Domain& domain, double lambda,
                                                     std::shared_ptr<const Grid> fd_grid) {
    if (domain.is_disk()) return std::make_shared<DiskGreenEngine>(domain, lambda);
    if (domain.is_annulus()) return std::make_shared<AnnulusGreenEngine>(domain, lambda);
    if (!fd_grid)
        throw ConfigError("make_green_engine: star domains need a grid for the FD backend");
    return std::make_shared<FdGreenEngine>(domain, lambda, std::move(fd_grid));
}

std::shared_ptr<const GreenEngine> make_fd_green_engine(std::shared_ptr<const Grid> grid,
                                                        double lambda) {
    Domain d = grid->domain();
    return std::make_shared<FdGreenEngine>(std::move(d), lambda, std::move(grid));
}

namespace {
void check_source_resolution(const Grid& grid, const Point& xi) {
    const Domain& dom = grid.domain();
    if (!dom.contains(xi) || dom.distance_to_boundary(xi) <= 0)
        throw DomainError("solve_regular_part: source must be an interior point");
    const double d = dom.distance_to_boundary(xi);
    // local boundary-layer width: outermost radial spacing near the source angle
    const double t = std::atan2(xi.y(), xi.x());
    double layer = grid.radius_map(1.0, t) - grid.radius_map(1.0 - grid.du(), t);
    if (dom.is_annulus())
        layer = std::max(layer, grid.radius_map(grid.du(), t) - grid.radius_map(0.0, t));
    if (d < 2.0 * layer) {
        std::ostringstream os;
        os << "solve_regular_part: source distance " << d << " is below two boundary layers ("
           << 2.0 * layer << "); increase n_radial to at least "
           << static_cast<int>(std::ceil(grid.n_radial() * 2.0 * layer / d));
        throw ResolutionError(os.str());
    }
}
} // namespace

GreenField solve_regular_part(const std::shared_ptr<const Grid>& grid, double lambda,
                              const Point& xi) {
    check_source_resolution(*grid, xi);
    auto engine = make_green_engine(grid->domain(), lambda, grid);
    GreenField gf;
    gf.source = xi;
    gf.lambda = lambda;
    gf.regular_part = engine->materialize(grid, xi);
    return gf;
}

double green_value(const GreenField& gf, const Point& x) {
    return fundamental(x, gf.source) + field_interpolate(gf.regular_part, x);
}

double robin_function(const std::shared_ptr<const Grid>& grid, double lambda, const Point& xi) {
    check_source_resolution(*grid, xi);
    auto engine = make_green_engine(grid->domain(), lambda, grid);
    return engine->robin_function(xi);
}

// ---------------------------------------------------------------------------
// Half-plane Robin Green function
// ---------------------------------------------------------------------------

namespace {

double halfplane_integral(double a, const Point& x, const Point& y) {
    const double w = x.x() - y.x();
    const double X2 = x.y() + y.y();
    auto f = [&](double tau) {
        const double t = X2 + tau / a;
        return t / (w * w + t * t);
    };
    const QuadratureResult q = integrate_laguerre(f, 1e-13, 64, 512);
    if (!q.converged && q.error_estimate > 1e-10)
        throw QuadratureError("halfplane_green: quadrature tail estimate " +
                              std::to_string(q.error_estimate) + " exceeds 1e-10");
    return q.value / a;
}

double halfplane_value_with_c(double c, double a, const Point& x, const Point& y) {
    const Point ystar(y.x(), -y.y());
    return fundamental(x, y) - fundamental(x, ystar) + c * halfplane_integral(a, x, y);
}

double calibrate_c_gamma() {
    // The Robin residual is affine in the coefficient of the integral term;
    // fit the root from finite-difference residuals at probe points.
    const double a = 1.0;
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x1 = -3.0 + 6.0 * i / 99.0;
        const Point y(0.3 * std::sin(3.0 * i), 0.4 + 2.0 * ((i * 37) % 100) / 100.0);
        const Point xb(x1, 0.0);
        auto residual = [&](double c) {
            const Point up(x1, h), dn(x1, -h);
            const double dG = (halfplane_value_with_c(c, a, up, y) -
                               halfplane_value_with_c(c, a, dn, y)) / (2.0 * h);
            return -dG + a * halfplane_value_with_c(c, a, xb, y);
        };
        const double r0 = residual(0.0);
        const double r1 = residual(1.0) - r0; // slope in c
        num += -r0 * r1;
        den += r1 * r1;
    }
    const double c = num / den;
    // Post-condition: residual below 1e-8 at the probes.
    for (int i = 0; i < 100; i += 9) {
        const double x1 = -3.0 + 6.0 * i / 99.0;
        const Point y(0.3 * std::sin(3.0 * i), 0.4 + 2.0 * ((i * 37) % 100) / 100.0);
        const Point up(x1, h), dn(x1, -h), xb(x1, 0.0);
        const double dG =
            (halfplane_value_with_c(c, a, up, y) - halfplane_value_with_c(c, a, dn, y)) / (2.0 * h);
        const double res = -dG + a * halfplane_value_with_c(c, a, xb, y);
        if (std::abs(res) > 1e-8)
            throw IntegrityError("halfplane_green: calibration residual " + std::to_string(res) +
                                 " exceeds 1e-8");
    }
    return c;
}

} // namespace

double halfplane_c_gamma() {
    static double c = calibrate_c_gamma();
    return c;
}

double halfplane_green(double a, const Point& x, const Point& y) {
    if (!(a > 0)) throw DomainError("halfplane_green: a must be positive");
    if (!(x.y() > 0) || !(y.y() > 0))
        throw DomainError("halfplane_green: points must lie in the open upper half-plane");
    if ((x - y).norm() == 0.0) throw SingularityError("halfplane_green: x = y");
    return halfplane_value_with_c(halfplane_c_gamma(), a, x, y);
}

} // namespace sinhp
