#pragma once

#include "sinhp/elliptic.hpp"
#include "sinhp/geometry.hpp"
#include "sinhp/green.hpp"
#include "sinhp/hamiltonian.hpp"

#include <memory>
#include <vector>

namespace sinhp {

struct Params {
    double epsilon = 1e-4;
    double lambda = 20.0;
    double alpha = 1.0;  // regime exponent
    double eps0 = 0.05;  // regime threshold

    Params(double eps, double lam, double alpha_ = 1.0, double eps0_ = 0.05);
    double rho() const { return epsilon / (lambda * lambda); }
    double regime_margin() const { return epsilon * std::pow(lambda, alpha); }
    bool in_regime() const { return regime_margin() <= eps0; }
};

/// w_j(x) = log(8 mu^2 / (mu^2 rho^2 + |x-xi|^2)^2) + 2 log(rho/eps).
double bubble(double mu, double rho, const Point& xi, double eps, const Point& x);
/// Gradient of the bubble in x.
Point bubble_gradient(double mu, double rho, const Point& xi, const Point& x);
/// eps^2 e^{w_j} = 8 mu^2 rho^2 / (mu^2 rho^2 + |x-xi|^2)^2  (= -lap w_j).
double bubble_eps2_exp(double mu, double rho, const Point& xi, double eps, const Point& x);

/// Harmonic Robin corrector: -lap H_j = 0, R_lambda H_j = -R_lambda w_j,
/// solved with the discrete Robin operator (data from the analytic normal
/// derivative of w_j).
Field corrector(const std::shared_ptr<const Grid>& grid, double lambda, double mu, double rho,
                const Point& xi, double eps);

/// Multi-bubble approximate solution and its expanded-variable views.
struct AnsatzBundle {
    std::shared_ptr<const Grid> grid;
    std::shared_ptr<const GreenEngine> engine;
    ConcentrationConfig config;
    Params params;

    std::vector<Field> w;      // per-bubble w_j on the grid
    std::vector<Field> H;      // per-bubble correctors on the grid
    Field U;                   // U = sum a_j (w_j + H_j)
    bool spectral_correctors = false;
    std::vector<double> corrector_shift; // spectral route: H_j = H_lambda(.,xi_j) - shift_j

    std::vector<double> probe_gap; // max |U_j - G(., xi_j)| off a neighborhood of xi_j
    Field robin_defect;            // per boundary node; zero at interior nodes
    double max_boundary_defect = 0.0;

    /// U at arbitrary x (bubbles analytic; correctors spectral or interpolated).
    double U_at(const Point& x) const;
    double corrector_at(int j, const Point& x) const;
};

AnsatzBundle build_ansatz(const std::shared_ptr<const Grid>& grid,
                          const ConcentrationConfig& config, const Params& params,
                          std::shared_ptr<const GreenEngine> engine = nullptr);

/// W(y) = sum_j 8 mu_j^2 / (mu_j^2 + |y - xi_j/rho|^2)^2 in scaled variables.
double potential_W(const ConcentrationConfig& config, double rho, const Point& y_scaled);

/// Kernel functions of the scaled linearized operator, i in {0,1,2}.
double kernel_Z(int i, int j, const ConcentrationConfig& config, double rho,
                const Point& y_scaled);

/// Scaled residual R(y) = lap V + (eps rho)^2 (e^V - e^{-V}) evaluated through
/// the analytic bubble Laplacian; returned on the grid (y = x / rho). Boundary
/// rows carry the Robin defect of U instead.
Field residual(const AnsatzBundle& bundle);

/// Scaled residual at an arbitrary scaled point (analytic in the bubbles).
double residual_at(const AnsatzBundle& bundle, const Point& y_scaled);

/// Weighted sup norm (2-parameter family: bubble weights + rho^2 floor).
double star_norm(const Field& f_scaled, const ConcentrationConfig& config, double rho,
                 double sigma = 0.5);

/// Star norm of the ansatz residual: interior grid nodes plus an analytic
/// near-field cloud around each scaled center (the sup lives at |y-xi'| = O(1),
/// far below the grid scale).
double residual_star_norm(const AnsatzBundle& bundle, double sigma = 0.5);

/// L phi = rho^2 lap_h phi + W phi (scaled variables on the grid).
Field linearized_apply(const AnsatzBundle& bundle, const Field& phi);
/// Full linearization rho^2 lap_h phi + (eps rho)^2 (e^V + e^{-V}) phi.
Field linearized_full_apply(const AnsatzBundle& bundle, const Field& phi);
/// Gap term Lambda phi = [(eps rho)^2 (e^V + e^{-V}) - W] phi.
Field gap_apply(const AnsatzBundle& bundle, const Field& phi);
/// N(phi) = (eps rho)^2 [e^V (e^phi - phi - 1) - e^{-V} (e^{-phi} + phi - 1)].
Field nonlinearity_N(const AnsatzBundle& bundle, const Field& phi);

/// Max over grid nodes of |H_j - (H_lambda(., xi_j) - log(8 mu_j^2) + 4 log lambda)|
/// with H_j from the discrete Robin solve (corrector expansion diagnostic).
double corrector_gap(const std::shared_ptr<const Grid>& grid, const GreenEngine& engine,
                     const ConcentrationConfig& config, const Params& params, int j);

} // namespace sinhp
