#include "sinhp/geometry.hpp"

#include "sinhp/errors.hpp"

#include <algorithm>
#include <cmath>
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

/// Golden-section minimization of f on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 160) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

Domain::Domain(std::variant<Disk, Annulus, StarSymmetric> shape) : shape_(std::move(shape)) {}

Domain Domain::disk(double radius) {
    if (!(radius > 0)) throw ConfigError("Disk radius must be positive");
    return Domain(Disk{radius});
}

Domain Domain::annulus(double r_inner, double r_outer) {
    if (!(0 < r_inner && r_inner < r_outer))
        throw ConfigError("Annulus requires 0 < r_inner < r_outer");
    return Domain(Annulus{r_inner, r_outer});
}

Domain Domain::star(std::vector<double> cos_coeffs) {
    if (cos_coeffs.empty()) throw ConfigError("StarSymmetric needs at least the constant coefficient");
    Domain d(StarSymmetric{std::move(cos_coeffs)});
    // Positivity of the radius profile, sampled densely.
    for (int i = 0; i < 8192; ++i) {
        if (!(d.boundary_radius(two_pi * i / 8192.0) > 0))
            throw ConfigError("StarSymmetric radius profile must be positive for all angles");
    }
    return d;
}

double Domain::boundary_radius(double t) const {
    if (is_disk()) return as_disk().radius;
    if (is_annulus()) return as_annulus().r_outer;
    const auto& c = as_star().cos_coeffs;
    double r = c[0];
    for (size_t k = 1; k < c.size(); ++k) r += c[k] * std::cos(k * t);
    return r;
}

double Domain::boundary_radius_d1(double t) const {
    if (!is_star()) return 0.0;
    const auto& c = as_star().cos_coeffs;
    double r = 0.0;
    for (size_t k = 1; k < c.size(); ++k) r -= c[k] * k * std::sin(k * t);
    return r;
}

double Domain::boundary_radius_d2(double t) const {
    if (!is_star()) return 0.0;
    const auto& c = as_star().cos_coeffs;
    double r = 0.0;
    for (size_t k = 1; k < c.size(); ++k) r -= c[k] * k * k * std::cos(k * t);
    return r;
}

double Domain::inner_radius() const {
    if (!is_annulus()) throw DomainError("inner_radius: domain has no inner boundary");
    return as_annulus().r_inner;
}

bool Domain::contains(const Point& x, double tol) const {
    const double r = x.norm();
    if (is_disk()) return r <= as_disk().radius + tol;
    if (is_annulus()) {
        const auto& a = as_annulus();
        return r >= a.r_inner - tol && r <= a.r_outer + tol;
    }
    return r <= boundary_radius(std::atan2(x.y(), x.x())) + tol;
}

double Domain::distance_to_boundary(const Point& x) const {
    if (!contains(x)) throw DomainError("distance_to_boundary: point lies outside the closed domain");
    const double r = x.norm();
    if (is_disk()) return as_disk().radius - r;
    if (is_annulus()) {
        const auto& a = as_annulus();
        return std::min(r - a.r_inner, a.r_outer - r);
    }
    // Star: 1D minimization of |x - b(phi)| over the boundary angle.
    auto dist2 = [&](double phi) {
        const double rb = boundary_radius(phi);
        const Point b(rb * std::cos(phi), rb * std::sin(phi));
        return (x - b).squaredNorm();
    };
    const int n_scan = 1024;
    double best = dist2(0.0);
    int best_i = 0;
    for (int i = 1; i < n_scan; ++i) {
        const double v = dist2(two_pi * i / n_scan);
        if (v < best) { best = v; best_i = i; }
    }
    const double h = two_pi / n_scan;
    const double phi = golden_min(dist2, best_i * h - h, best_i * h + h);
    return std::sqrt(dist2(phi));
}

Domain::Projection Domain::boundary_projection(const Point& x) const {
    const double d = distance_to_boundary(x);
    if (d <= 0.0) throw DomainError("boundary_projection: point is on the boundary");
    const double r = x.norm();

    if (is_disk()) {
        const double R = as_disk().radius;
        if (r < 1e-14 * R) {
            // Center: every boundary point is equidistant. Deterministic
            // smallest-angle representative.
            return {Point(R, 0.0), true};
        }
        return {x * (R / r), false};
    }
    if (is_annulus()) {
        const auto& a = as_annulus();
        const double din = r - a.r_inner, dout = a.r_outer - r;
        const bool tie = std::abs(din - dout) <= 1e-12 * a.r_outer;
        const Point dir = x / r;
        if (tie) return {dir * a.r_inner, true}; // inner has the smaller angle-radius pair; pick it deterministically
        return {din < dout ? Point(dir * a.r_inner) : Point(dir * a.r_outer), tie};
    }

    // Star: collect local minimizers of the boundary-distance function.
    auto dist2 = [&](double phi) {
        const double rb = boundary_radius(phi);
        const Point b(rb * std::cos(phi), rb * std::sin(phi));
        return (x - b).squaredNorm();
    };
    const int n_scan = 2048;
    std::vector<double> vals(n_scan);
    for (int i = 0; i < n_scan; ++i) vals[i] = dist2(two_pi * i / n_scan);
    const double h = two_pi / n_scan;
    std::vector<double> candidates;
    for (int i = 0; i < n_scan; ++i) {
        const double prev = vals[(i + n_scan - 1) % n_scan];
        const double next = vals[(i + 1) % n_scan];
        if (vals[i] <= prev && vals[i] <= next)
            candidates.push_back(golden_min(dist2, i * h - h, i * h + h));
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (double phi : candidates) dmin = std::min(dmin, dist2(phi));
    std::vector<double> winners;
    for (double phi : candidates) {
        if (dist2(phi) <= dmin * (1.0 + 1e-10)) winners.push_back(wrap_angle(phi));
    }
    std::sort(winners.begin(), winners.end());
    // Merge near-duplicates produced by adjacent scan cells.
    std::vector<double> unique;
    for (double phi : winners) {
        if (unique.empty() || phi - unique.back() > 1e-6) unique.push_back(phi);
    }
    const double phi = unique.front();
    const double rb = boundary_radius(phi);
    return {Point(rb * std::cos(phi), rb * std::sin(phi)), unique.size() > 1};
}

int Domain::boundary_component_of(const Point& b, double tol) const {
    const double r = b.norm();
    if (is_annulus()) {
        const auto& a = as_annulus();
        if (std::abs(r - a.r_outer) <= tol * a.r_outer) return 0;
        if (std::abs(r - a.r_inner) <= tol * a.r_outer) return 1;
        throw DomainError("point is not on the boundary");
    }
    const double rb = boundary_radius(std::atan2(b.y(), b.x()));
    if (std::abs(r - rb) <= tol * std::max(1.0, rb)) return 0;
    throw DomainError("point is not on the boundary");
}

Point Domain::outward_normal(const Point& b, double tol) const {
    const int comp = boundary_component_of(b, tol); // membership check
    if (is_disk() || is_annulus()) {
        const Point dir = b / b.norm();
        return comp == 1 ? Point(-dir) : dir;
    }
    const double phi = std::atan2(b.y(), b.x());
    const double r = boundary_radius(phi), rp = boundary_radius_d1(phi);
    // b(phi) = r e_r; tangent T = r' e_r + r e_t; outward normal = (T_y, -T_x)/|T|
    const Point er(std::cos(phi), std::sin(phi)), et(-std::sin(phi), std::cos(phi));
    const Point tangent = rp * er + r * et;
    Point n(tangent.y(), -tangent.x());
    return n / n.norm();
}

double Domain::mean_curvature(const Point& b, double tol) const {
    const int comp = boundary_component_of(b, tol);
    if (is_disk()) return 1.0 / as_disk().radius;
    if (is_annulus()) {
        return comp == 0 ? 1.0 / as_annulus().r_outer : -1.0 / as_annulus().r_inner;
    }
    const double phi = std::atan2(b.y(), b.x());
    const double r = boundary_radius(phi);
    const double rp = boundary_radius_d1(phi);
    const double rpp = boundary_radius_d2(phi);
    return (r * r + 2.0 * rp * rp - r * rpp) / std::pow(r * r + rp * rp, 1.5);
}

std::pair<double, double> Domain::axis_chord() const {
    if (is_disk()) return {-as_disk().radius, as_disk().radius};
    if (is_star()) return {-boundary_radius(std::numbers::pi), boundary_radius(0.0)};
    throw DomainError("axis_chord: domain is not simply connected");
}

double Domain::area() const {
    if (is_disk()) {
        const double R = as_disk().radius;
        return std::numbers::pi * R * R;
    }
    if (is_annulus()) {
        const auto& a = as_annulus();
        return std::numbers::pi * (a.r_outer * a.r_outer - a.r_inner * a.r_inner);
    }
    // 1/2 ∫ r(phi)^2 dphi; periodic trapezoid converges spectrally.
    const int n = 8192;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = boundary_radius(two_pi * i / n);
        s += r * r;
    }
    return 0.5 * s * two_pi / n;
}

std::string Domain::describe() const {
    std::ostringstream os;
    if (is_disk()) {
        os << "disk R=" << as_disk().radius;
    } else if (is_annulus()) {
        os << "annulus r_in=" << as_annulus().r_inner << " r_out=" << as_annulus().r_outer;
    } else {
        os << "star coeffs=";
        for (double c : as_star().cos_coeffs) os << c << ",";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

double Grid::psi(double u) const {
    if (domain_.is_annulus()) {
        // Two-sided tanh clustering: boundary layers at both circles.
        const double k = k_;
        if (k < 1e-12) return u;
        return 0.5 * (1.0 + std::tanh(k * (u - 0.5)) / std::tanh(0.5 * k));
    }
    const double k = k_;
    if (k < 1e-12) return u;
    return (1.0 - std::exp(-k * u)) / (1.0 - std::exp(-k));
}

double Grid::psi_d(double u) const {
    if (domain_.is_annulus()) {
        const double k = k_;
        if (k < 1e-12) return 1.0;
        const double c = std::cosh(k * (u - 0.5));
        return 0.5 * k / (c * c * std::tanh(0.5 * k));
    }
    const double k = k_;
    if (k < 1e-12) return 1.0;
    return k * std::exp(-k * u) / (1.0 - std::exp(-k));
}

double Grid::radius_map(double u, double t) const {
    if (domain_.is_annulus()) {
        const auto& a = domain_.as_annulus();
        return a.r_inner + (a.r_outer - a.r_inner) * psi(u);
    }
    return domain_.boundary_radius(t) * psi(u);
}

double Grid::radius_map_du(double u, double t) const {
    if (domain_.is_annulus()) {
        const auto& a = domain_.as_annulus();
        return (a.r_outer - a.r_inner) * psi_d(u);
    }
    return domain_.boundary_radius(t) * psi_d(u);
}

double Grid::radius_map_dt(double u, double t) const {
    if (domain_.is_annulus()) return 0.0;
    return domain_.boundary_radius_d1(t) * psi(u);
}

Grid::Grid(Domain domain, int n_radial, int n_angular, double grading,
           std::optional<double> lambda_max)
    : domain_(std::move(domain)), n_radial_(n_radial), n_angular_(n_angular), grading_(grading) {
    if (n_radial < 8) throw ConfigError("build_grid: n_radial must be >= 8");
    if (n_angular < 16) throw ConfigError("build_grid: n_angular must be >= 16");
    if (!(grading >= 1.0)) throw ConfigError("build_grid: grading factor must be >= 1");

    // Fixed smooth map; steepness from the grading factor at a 20-cell reference
    // so dyadic refinement reuses the same map and stays second order.
    k_ = 20.0 * std::log(grading);
    has_center_ = !domain_.is_annulus();
    du_ = 1.0 / n_radial_;
    dt_ = two_pi / n_angular_;

    const int n_nodes = has_center_ ? 1 + n_radial_ * n_angular_ : (n_radial_ + 1) * n_angular_;
    nodes_.resize(n_nodes);
    area_.assign(n_nodes, 0.0);
    arc_.assign(n_nodes, 0.0);
    component_.assign(n_nodes, -1);
    level_.assign(n_nodes, 0);
    angular_.assign(n_nodes, 0);

    const int level_lo = has_center_ ? 1 : 0;
    if (has_center_) {
        nodes_[0] = Point(0.0, 0.0);
        level_[0] = 0;
        angular_[0] = 0;
        double a0 = 0.0;
        for (int k = 0; k < n_angular_; ++k) {
            const double c = radius_map(0.5 * du_, t_of(k));
            a0 += 0.5 * c * c * dt_;
        }
        area_[0] = a0;
    }
    for (int i = level_lo; i <= n_radial_; ++i) {
        for (int k = 0; k < n_angular_; ++k) {
            const int idx = node_index(i, k);
            const double t = t_of(k);
            const double u = u_of_level(i);
            const double c = radius_map(u, t);
            nodes_[idx] = Point(c * std::cos(t), c * std::sin(t));
            level_[idx] = i;
            angular_[idx] = k;
            // Exact radial integral of the cell area, midpoint in t.
            const double u_lo = std::max(0.0, u - 0.5 * du_);
            const double u_hi = std::min(1.0, u + 0.5 * du_);
            const double c_lo = radius_map(u_lo, t);
            const double c_hi = radius_map(u_hi, t);
            area_[idx] = 0.5 * (c_hi * c_hi - c_lo * c_lo) * dt_;
            if (i == n_radial_) {
                component_[idx] = 0;
                const double ct = radius_map_dt(1.0, t);
                arc_[idx] = std::sqrt(ct * ct + c * c) * dt_;
            } else if (i == 0 && domain_.is_annulus()) {
                component_[idx] = 1;
                arc_[idx] = c * dt_;
            }
        }
    }
    for (int idx = 0; idx < n_nodes; ++idx) {
        (component_[idx] >= 0 ? boundary_ : interior_).push_back(idx);
    }

    if (lambda_max) {
        if (!(*lambda_max > 0)) throw ConfigError("build_grid: lambda_max must be positive");
        const int layers = boundary_layer_cells(2.0 / *lambda_max);
        if (layers < 8) {
            std::ostringstream os;
            os << "build_grid: only " << layers << " radial layers lie within 2/lambda_max = "
               << 2.0 / *lambda_max << " of the boundary; need >= 8. Increase n_radial (currently "
               << n_radial_ << ").";
            throw ConfigError(os.str());
        }
    }
}

int Grid::node_index(int level, int k) const {
    k = ((k % n_angular_) + n_angular_) % n_angular_;
    if (has_center_) {
        if (level == 0) return 0;
        return 1 + (level - 1) * n_angular_ + k;
    }
    return level * n_angular_ + k;
}

double Grid::area_sum() const {
    double s = 0.0;
    for (double a : area_) s += a;
    return s;
}

double Grid::max_cell_diameter() const {
    double best = 0.0;
    for (int idx = 0; idx < n_nodes(); ++idx) {
        const int i = level_[idx];
        const double t = t_of(angular_[idx]);
        const double u = u_of_level(i);
        const double u_lo = std::max(0.0, u - 0.5 * du_);
        const double u_hi = std::min(1.0, u + 0.5 * du_);
        const double dr = radius_map(u_hi, t) - radius_map(u_lo, t);
        const double arc = radius_map(u, t) * dt_;
        best = std::max(best, std::hypot(dr, arc));
    }
    return best;
}

int Grid::boundary_layer_cells(double width) const {
    int worst = n_radial_;
    const int t_samples = domain_.is_star() ? n_angular_ : 1;
    for (int s = 0; s < t_samples; ++s) {
        const double t = t_of(s);
        const double cb = radius_map(1.0, t);
        int count = 0;
        for (int i = n_radial_ - 1; i >= 0; --i) {
            if (cb - radius_map(u_of_level(i), t) <= width)
                ++count;
            else
                break;
        }
        worst = std::min(worst, count);
    }
    return worst;
}

double Grid::node_boundary_distance(int idx) const {
    return domain_.distance_to_boundary(nodes_[idx]);
}

int Grid::nearest_node(const Point& x) const {
    const double t = wrap_angle(std::atan2(x.y(), x.x()));
    int k = static_cast<int>(std::lround(t / dt_)) % n_angular_;
    const double r = x.norm();
    // invert the radial map by bisection on u
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (radius_map(mid, t_of(k)) < r)
            lo = mid;
        else
            hi = mid;
    }
    int i = static_cast<int>(std::lround(0.5 * (lo + hi) / du_));
    i = std::clamp(i, 0, n_radial_);
    if (has_center_ && i == 0) return 0;
    return node_index(i, k);
}

std::shared_ptr<const Grid> build_grid(const Domain& domain, int n_radial, int n_angular,
                                       double grading, std::optional<double> lambda_max) {
    return std::make_shared<const Grid>(domain, n_radial, n_angular, grading, lambda_max);
}

} // namespace sinhp
