#pragma once

#include "sinhp/ansatz.hpp"
#include "sinhp/elliptic.hpp"

#include <string>
#include <vector>

namespace sinhp {

struct PeakInfo {
    Point position;
    double value = 0.0;
    int spin = 0;
    double lambda_d = 0.0;   // lambda * dist(peak, boundary)
    double dist_to_xi = 0.0; // |peak - xi_j| for the matched center
    int matched_center = -1;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double seed_residual_inf = 0.0;
    double final_residual_inf = 0.0;
    double final_residual_star = 0.0;
    Field solution;
    std::vector<PeakInfo> peaks;
    bool peaks_ok = false;
    std::string concentration_message;
    double energy_J = 0.0;
    double predicted_energy = 0.0;
    double energy_gap = 0.0;
    int continuation_rungs = 0;
    std::vector<double> residual_history;
};

struct NewtonOptions {
    double tol_rel = 1e-9; // relative to the seed residual
    int max_iterations = 50;
    int max_halvings = 20;
    // Sup-norm trust region: exponential peaks tolerate only O(1) moves per
    // step; inactive near the solution so quadratic convergence survives.
    double step_cap = 2.0;
};

/// Damped Newton for lap u + eps^2 (e^u - e^{-u}) = 0 with the Robin rows of
/// the discrete operator; Armijo backtracking (factor 1/2).
SolveReport newton_solve(const std::shared_ptr<const Grid>& grid, const Params& params,
                         const Field& seed, const NewtonOptions& options = {});

/// ||F(seed)||_inf without iterating.
double newton_seed_residual(const std::shared_ptr<const Grid>& grid, const Params& params,
                            const Field& seed);

/// Newton seeded by the ansatz; if the direct solve misses the concentrating
/// branch, continues in eps from the scale where the nodal ansatz matches the
/// discrete spike balance, walking down in quarter-octave rungs seeded by the
/// previous solution. The report's seed residual refers to the target-eps
/// ansatz and `continuation_rungs` counts the ladder length (0 = direct).
SolveReport solve_with_continuation(const std::shared_ptr<const Grid>& grid,
                                    const std::shared_ptr<const GreenEngine>& engine,
                                    const ConcentrationConfig& config, const Params& params,
                                    const NewtonOptions& options = {});

/// J(u) = 1/2 ∫|grad u|^2 - eps^2 ∫(e^u + e^{-u}) + lambda/2 ∮ u^2 by composite
/// quadrature with the grid weights; gradient by centered differences.
double energy(const Field& u, double eps, double lambda);

/// Explicit part of the reduced energy:
/// -16 pi m + 8 pi m log 8 - 16 pi m log(rho lambda^2) - 4 pi phi.
double reduced_energy_prediction(int m, double rho, double lambda, double phi_value);

/// J(U) for the ansatz with the concentrated parts integrated in closed form
/// (nodal quadrature cannot see the unresolved bubble cores).
double ansatz_energy(const AnsatzBundle& bundle);

/// Locates signed peaks of u (strict local extrema over the 8-neighborhood,
/// magnitude >= 25% of sup|u|) and matches them to the concentration points.
void concentration_report(SolveReport& report, const ConcentrationConfig& config);

} // namespace sinhp
