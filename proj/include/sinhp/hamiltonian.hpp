#pragma once

#include "sinhp/geometry.hpp"
#include "sinhp/green.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sinhp {

struct SpinConfig {
    std::vector<int> a; // each +1 or -1

    explicit SpinConfig(std::vector<int> spins);
    int m() const { return static_cast<int>(a.size()); }
};

/// Interaction weighting in the mass rule: `as_written` uses a_i (the rule as
/// printed), `spin_product` uses a_i a_j (the pairing in the energy expansion).
enum class MassRule { as_written, spin_product };

struct ConcentrationConfig {
    std::vector<Point> xi;
    SpinConfig spins;
    std::vector<double> mu; // empty until computed
    double lambda = 0.0;
    bool masses_computed = false;

    ConcentrationConfig(std::vector<Point> points, SpinConfig spins, double lambda);
    int m() const { return spins.m(); }
    void validate(const Domain& domain) const; // distinct interior points
};

struct FeasibleSet {
    enum class Mode { axis_symmetric, per_component, free_points };

    Mode mode = Mode::free_points;
    double K = 20.0;
    double delta_sep = 0.0;
    std::vector<int> component_assignment; // per point, per_component mode

    /// Defaults for delta_sep: (b-a)/4 in axis mode, min boundary gap / 4 in
    /// component mode, diam/8 in free mode.
    static FeasibleSet axis(const Domain& domain, double K = 20.0,
                            std::optional<double> delta_sep = std::nullopt);
    static FeasibleSet per_component(const Domain& domain, std::vector<int> assignment,
                                     double K = 20.0,
                                     std::optional<double> delta_sep = std::nullopt);
    static FeasibleSet free_set(const Domain& domain, double K = 20.0,
                                std::optional<double> delta_sep = std::nullopt);

    bool contains(const Domain& domain, const std::vector<Point>& xi, double lambda) const;
    /// Signed margin (positive inside); the minimum over all constraints.
    double margin(const Domain& domain, const std::vector<Point>& xi, double lambda) const;
};

/// phi_m = sum_j [ H(xi_j,xi_j) + sum_{i != j} a_i a_j G(xi_i, xi_j) ].
double phi_m(const ConcentrationConfig& config, const GreenEngine& green);

/// Mass rule log(8 mu_j^2) = H(xi_j,xi_j) + sum_{i!=j} w_ij G(xi_i,xi_j) + 4 log lambda,
/// w_ij = a_i (as_written) or a_i a_j (spin_product). Flags (2.23) violations.
struct MassReport {
    std::vector<double> mu;
    bool bounds_ok = true; // mu_j within (delta_bound, 1/delta_bound)
    double delta_bound = 0.1;
};
MassReport compute_masses(ConcentrationConfig& config, const GreenEngine& green,
                          MassRule rule = MassRule::spin_product, double delta_bound = 0.1);

/// Central-difference gradient of phi_m in the point coordinates
/// (step 1e-3 * min distance-to-boundary, shrunk if it crosses the boundary).
std::vector<Point> grad_phi_m(const ConcentrationConfig& config, const GreenEngine& green);

struct MinimizeOptions {
    int n_starts = 8;
    int max_iterations = 400;
    double f_tol = 1e-12;
    double x_tol = 1e-10;
    std::uint64_t seed = 1;
};

struct TraceRow {
    int start = 0;
    int iteration = 0;
    std::vector<Point> xi;
    double phi = 0.0;
    double margin = 0.0;
};

struct MinimizeResult {
    ConcentrationConfig config;
    double phi = 0.0;
    bool boundary_minimum_warning = false;
    int best_start = 0;
    std::vector<TraceRow> trace;
};

/// Multi-start projected Nelder–Mead with coordinate polish, honoring the
/// feasible-set membership test. Seeds sit on normal fibers at lambda*d = theta0
/// over spread boundary anchors; the trace records every accepted step.
MinimizeResult minimize(const Domain& domain, const SpinConfig& spins, const FeasibleSet& feasible,
                        double lambda, const GreenEngine& green,
                        const MinimizeOptions& options = {});

} // namespace sinhp
