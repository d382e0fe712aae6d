#pragma once

#include <functional>
#include <vector>

namespace sinhp {

/// Nodes and weights for ∫_0^∞ e^{-t} f(t) dt ≈ Σ w_i f(x_i).
struct LaguerreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss–Laguerre rule of the given order (Golub–Welsch). Rules are cached.
const LaguerreRule& gauss_laguerre(int order);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0; // |I_2n - I_n| of the last doubling
    int order = 0;               // final order used
    bool converged = false;
};

/// Adaptive Gauss–Laguerre for ∫_0^∞ e^{-t} f(t) dt: doubles the order
/// (start_order, 2*start_order, ...) until the change is below tol or
/// max_order is reached.
QuadratureResult integrate_laguerre(const std::function<double(double)>& f,
                                    double tol = 1e-12, int start_order = 64,
                                    int max_order = 512);

/// Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt, x > 0.
/// Series for small x, continued fraction otherwise (~1e-15 accurate).
double expint_e1(double x);

/// e^x E1(x), stable for large x.
double expint_e1_scaled(double x);

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

} // namespace sinhp
