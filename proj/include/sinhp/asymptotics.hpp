#pragma once

#include <vector>

namespace sinhp {

/// Boundary-layer profile h(theta) = -4 log(2 theta) + 8 ∫_0^∞ e^{-t} log(2 theta + t) dt.
/// Absolute accuracy <= 1e-10 on [1e-3, 1e3].
double h_profile(double theta);

/// v(theta) = -2 theta - 4 theta ∫_0^∞ e^{-2 theta s} / (1+s)^2 ds  (< 0 for theta > 0).
double v_profile(double theta);

/// First/second derivatives of h by central differences (step 1e-6 * max(theta,1)).
double h_profile_d1(double theta);
double h_profile_d2(double theta);

struct Theta0 {
    double theta0;
    double h_value;
    double h_second; // > 0 (nondegenerate minimum)
};

/// Locates the unique minimum of h: coarse log-spaced scan, golden-section
/// bracket, then bisection on h' to |h'(theta0)| <= 1e-8.
Theta0 find_theta0();

/// Cached singleton of find_theta0 (computed once per process).
const Theta0& theta0();

struct ProfileTable {
    std::vector<double> theta;
    std::vector<double> h, h1, h2, v;
    double theta0;
    double h_theta0;

    static ProfileTable build(int n_samples = 241, double lo = 1e-3, double hi = 1e3);
};

/// Robin-function expansion -4 log(lambda) + h(lambda d) + kappa v(lambda d)/lambda.
/// Requires lambda*d within the tabulated range [1e-3, 1e3].
double robin_expansion(double lambda, double d, double kappa);

} // namespace sinhp
