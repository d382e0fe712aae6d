#pragma once

#include "sinhp/geometry.hpp"
#include "sinhp/hamiltonian.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sinhp {

/// Parsed run configuration (plain-text key = value file; see docs/config.md).
struct RunConfig {
    // domain
    std::string domain_type = "disk";
    double radius = 1.0;
    double r_inner = 0.5, r_outer = 1.0;
    std::vector<double> cos_coeffs;

    // grid
    int n_radial = 128;
    int n_angular = 256;
    double grading = 1.15;
    bool lambda_max_check = false;

    std::vector<double> lambda_list{20.0};
    std::vector<double> epsilon_list{1e-4};

    // regime
    double alpha = 1.0;
    double eps0 = 0.05;
    bool allow_out_of_regime = false;

    // concentration points
    int m = 1;
    std::vector<int> spins{1};
    std::string mode = "free"; // axis_symmetric | per_component | free
    std::vector<int> components;
    std::vector<Point> explicit_points; // optional: skip minimization
    double K = 20.0;
    std::optional<double> delta_sep;
    double sigma = 0.5;
    std::string mass_rule = "spin_product";

    // optimizer
    int opt_starts = 8;
    int opt_max_iterations = 400;

    // newton
    double newton_tol_rel = 1e-9;
    int newton_max_iterations = 50;

    // green-table probes
    std::vector<Point> green_sources;
    std::vector<Point> green_targets;

    // output
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int workers = 2;
    bool write_fields = false;

    Domain make_domain() const;
    FeasibleSet make_feasible_set(const Domain& domain) const;
    MassRule make_mass_rule() const;
    void validate() const;

    /// FNV-1a hash of the canonical key=value form.
    std::string hash() const;
    std::string canonical() const;
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");

} // namespace sinhp
