#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace sinhp {

using Point = Eigen::Vector2d;

struct Disk {
    double radius = 1.0;
};

struct Annulus {
    double r_inner = 0.5;
    double r_outer = 1.0;
};

/// Boundary r(phi) = cos_coeffs[0] + sum_{k>=1} cos_coeffs[k] cos(k phi).
/// Even in phi by construction, so the domain is symmetric in the x-axis.
struct StarSymmetric {
    std::vector<double> cos_coeffs;
};

class Domain {
public:
    static Domain disk(double radius);
    static Domain annulus(double r_inner, double r_outer);
    static Domain star(std::vector<double> cos_coeffs);

    bool is_disk() const { return std::holds_alternative<Disk>(shape_); }
    bool is_annulus() const { return std::holds_alternative<Annulus>(shape_); }
    bool is_star() const { return std::holds_alternative<StarSymmetric>(shape_); }
    const Disk& as_disk() const { return std::get<Disk>(shape_); }
    const Annulus& as_annulus() const { return std::get<Annulus>(shape_); }
    const StarSymmetric& as_star() const { return std::get<StarSymmetric>(shape_); }

    int n_boundary_components() const { return is_annulus() ? 2 : 1; }
    bool simply_connected() const { return !is_annulus(); }

    /// Outer boundary radius and derivatives at angle t.
    double boundary_radius(double t) const;
    double boundary_radius_d1(double t) const;
    double boundary_radius_d2(double t) const;
    /// Inner radius (annulus only).
    double inner_radius() const;

    bool contains(const Point& x, double tol = 1e-12) const;

    double distance_to_boundary(const Point& x) const;

    struct Projection {
        Point point;
        bool tie = false;
    };
    Projection boundary_projection(const Point& x) const;

    Point outward_normal(const Point& b, double tol = 1e-8) const;
    double mean_curvature(const Point& b, double tol = 1e-8) const;

    /// 0 = outer boundary, 1 = inner boundary (annulus).
    int boundary_component_of(const Point& b, double tol = 1e-8) const;

    /// Omega ∩ (R x {0}) = (a, b); simply connected domains only.
    std::pair<double, double> axis_chord() const;

    double area() const;

    std::string describe() const;

private:
    explicit Domain(std::variant<Disk, Annulus, StarSymmetric> shape);
    std::variant<Disk, Annulus, StarSymmetric> shape_;
};

/// Polar-structured grid. Chart coordinates (u, t) in [0,1] x [0,2pi); the
/// physical radius is c(u,t). Nodes sit at u_i = i/n_radial, t_k = 2pi k/n_angular.
/// Radial grading lives in the smooth map u -> c so uniform-chart finite
/// differences stay second order under refinement.
class Grid {
public:
    Grid(Domain domain, int n_radial, int n_angular, double grading = 1.15,
         std::optional<double> lambda_max = std::nullopt);

    const Domain& domain() const { return domain_; }
    int n_radial() const { return n_radial_; }
    int n_angular() const { return n_angular_; }
    double grading() const { return grading_; }
    bool has_center() const { return has_center_; }
    int n_nodes() const { return static_cast<int>(nodes_.size()); }

    /// Radial levels i run 0..n_radial. For disk/star level 0 is the single
    /// center node (any k collapses to it).
    int node_index(int level, int k) const;
    int level_of(int idx) const { return level_[idx]; }
    int angular_of(int idx) const { return angular_[idx]; }

    const Point& node(int idx) const { return nodes_[idx]; }
    double cell_area(int idx) const { return area_[idx]; }
    bool is_boundary(int idx) const { return component_[idx] >= 0; }
    int boundary_component(int idx) const { return component_[idx]; }
    double arc_weight(int idx) const { return arc_[idx]; }

    const std::vector<int>& interior_indices() const { return interior_; }
    const std::vector<int>& boundary_indices() const { return boundary_; }

    double area_sum() const;
    double max_cell_diameter() const;

    double du() const { return du_; }
    double dt() const { return dt_; }
    double u_of_level(int level) const { return level * du_; }
    double t_of(int k) const { return k * dt_; }

    /// Radius map c(u,t) and partials; valid slightly beyond u in [0,1]
    /// (analytic extension used for ghost-node elimination).
    double radius_map(double u, double t) const;
    double radius_map_du(double u, double t) const;
    double radius_map_dt(double u, double t) const;

    /// Number of whole radial cells within `width` of the outer boundary
    /// (worst case over angles for star domains).
    int boundary_layer_cells(double width) const;

    /// Distance from node to the analytic boundary.
    double node_boundary_distance(int idx) const;

    /// Nearest node index to a point (by chart coordinates).
    int nearest_node(const Point& x) const;

private:
    double psi(double u) const;
    double psi_d(double u) const;

    Domain domain_;
    int n_radial_;
    int n_angular_;
    double grading_;
    double k_ = 0.0;    // map steepness
    bool has_center_ = false;
    double du_ = 0.0, dt_ = 0.0;

    std::vector<Point> nodes_;
    std::vector<double> area_;
    std::vector<double> arc_;
    std::vector<int> component_; // -1 interior
    std::vector<int> level_, angular_;
    std::vector<int> interior_, boundary_;
};

std::shared_ptr<const Grid> build_grid(const Domain& domain, int n_radial, int n_angular,
                                       double grading = 1.15,
                                       std::optional<double> lambda_max = std::nullopt);

} // namespace sinhp
