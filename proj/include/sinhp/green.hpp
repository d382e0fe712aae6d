#pragma once

#include "sinhp/elliptic.hpp"
#include "sinhp/geometry.hpp"

#include <memory>

namespace sinhp {

/// Fundamental solution Gamma(x-y) = -4 log |x-y| (so -lap G = 8 pi delta).
double fundamental(const Point& x, const Point& y);

/// Bilinear interpolation of a grid function in the polar index chart.
double field_interpolate(const Field& f, const Point& x);

/// Regular part H_lambda(., xi) of the Robin Green function as a grid field.
struct GreenField {
    Point source;
    double lambda = 0.0;
    Field regular_part;
    static constexpr double normalization = 8.0 * 3.14159265358979323846; // -lap G = 8 pi delta
};

/// Evaluator for G_lambda / H_lambda on a fixed (domain, lambda). Disk and
/// annulus use a separated-variables (Fourier-mode) closed form, accurate to
/// roundoff for sources off the boundary; star domains fall back to the
/// finite-difference Robin solve on a grid. Immutable and shareable.
class GreenEngine {
public:
    virtual ~GreenEngine() = default;

    const Domain& domain() const { return domain_; }
    double lambda() const { return lambda_; }

    /// H_lambda(x, xi).
    virtual double regular_part(const Point& x, const Point& xi) const = 0;
    /// Gradient of x -> H_lambda(x, xi) (used for analytic Robin defects).
    virtual Point regular_part_gradient(const Point& x, const Point& xi) const;

    double green(const Point& x, const Point& y) const;
    double robin_function(const Point& xi) const;

    /// Discrete field of H_lambda(., xi) on a grid.
    virtual Field materialize(const std::shared_ptr<const Grid>& grid, const Point& xi) const;

    virtual std::string backend_name() const = 0;

protected:
    GreenEngine(Domain domain, double lambda);
    Domain domain_;
    double lambda_;
};

/// Spectral engine for disk/annulus; FD engine for star (grid required then).
std::shared_ptr<const GreenEngine> make_green_engine(
    const Domain& domain, double lambda,
    std::shared_ptr<const Grid> fd_grid = nullptr);

/// FD engine regardless of domain type (used for cross-checks).
std::shared_ptr<const GreenEngine> make_fd_green_engine(std::shared_ptr<const Grid> grid,
                                                        double lambda);

/// Solves the desingularized problem lap H = 0, R_lambda H = -R_lambda Gamma(.-xi).
GreenField solve_regular_part(const std::shared_ptr<const Grid>& grid, double lambda,
                              const Point& xi);

/// Gamma(x - xi) + interpolated regular part.
double green_value(const GreenField& gf, const Point& x);

/// H_lambda(xi, xi).
double robin_function(const std::shared_ptr<const Grid>& grid, double lambda, const Point& xi);

/// Robin Green function of the upper half-plane with coefficient a > 0
/// (exterior normal -e2), normalized so the singular part is -4 log |x-y|.
/// The improper integral uses adaptive Gauss-Laguerre (order >= 64); the
/// coefficient c_gamma on the integral term is calibrated once by zeroing the
/// Robin boundary residual at probe points.
double halfplane_green(double a, const Point& x, const Point& y);

/// Calibrated integral-term coefficient (cached; recorded in output metadata).
double halfplane_c_gamma();

} // namespace sinhp
