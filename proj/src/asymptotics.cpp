#include "sinhp/asymptotics.hpp"

#include "sinhp/errors.hpp"
#include "sinhp/special.hpp"

#include <cmath>
#include <mutex>

namespace sinhp {

namespace {

// For 2*theta >= 1 the integrands are analytic well away from the Laguerre
// nodes and adaptive Gauss-Laguerre converges geometrically. Below that the
// branch point at -2*theta stalls the quadrature, so the integrals are
// reduced exactly to the exponential integral:
//   ∫_0^∞ e^{-t} log(2θ + t) dt = log(2θ) + e^{2θ} E1(2θ)
//   ∫_0^∞ e^{-2θs} (1+s)^{-2} ds = 1 - 2θ e^{2θ} E1(2θ)
constexpr double gl_switch = 0.5;

double h_integral(double theta) {
    if (theta >= gl_switch) {
        auto f = [theta](double t) { return std::log(2.0 * theta + t); };
        const QuadratureResult q = integrate_laguerre(f, 1e-13, 64, 512);
        if (!q.converged && q.error_estimate > 1e-10)
            throw QuadratureError("h_profile: Gauss-Laguerre did not converge");
        return q.value;
    }
    return std::log(2.0 * theta) + expint_e1_scaled(2.0 * theta);
}

} // namespace

double h_profile(double theta) {
    if (!(theta > 0)) throw DomainError("h_profile: theta must be positive");
    return -4.0 * std::log(2.0 * theta) + 8.0 * h_integral(theta);
}

double v_profile(double theta) {
    if (!(theta > 0)) throw DomainError("v_profile: theta must be positive");
    const double b = 2.0 * theta;
    double integral;
    if (theta >= gl_switch) {
        // substitute t = b s:  (1/b) ∫ e^{-t} (1 + t/b)^{-2} dt
        auto f = [b](double t) {
            const double z = 1.0 + t / b;
            return 1.0 / (z * z);
        };
        const QuadratureResult q = integrate_laguerre(f, 1e-13, 64, 512);
        if (!q.converged && q.error_estimate > 1e-10)
            throw QuadratureError("v_profile: Gauss-Laguerre did not converge");
        integral = q.value / b;
    } else {
        integral = 1.0 - b * expint_e1_scaled(b);
    }
    return -2.0 * theta - 4.0 * theta * integral;
}

double h_profile_d1(double theta) {
    const double step = 1e-6 * std::max(theta, 1.0);
    return (h_profile(theta + step) - h_profile(theta - step)) / (2.0 * step);
}

double h_profile_d2(double theta) {
    const double step = 1e-4 * std::max(theta, 1.0);
    return (h_profile(theta + step) - 2.0 * h_profile(theta) + h_profile(theta - step)) /
           (step * step);
}

Theta0 find_theta0() {
    // Coarse log-spaced scan for the bracket.
    const int n = 4000;
    const double lo = 1e-3, hi = 1e3;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    std::vector<double> thetas(n), values(n);
    for (int i = 0; i < n; ++i) {
        thetas[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        values[i] = h_profile(thetas[i]);
        if (values[i] < best) { best = values[i]; best_i = i; }
    }
    if (best_i == 0 || best_i == n - 1)
        throw IntegrityError("find_theta0: minimum at scan edge contradicts h -> +inf at both ends");

    // The slope must change direction exactly once across the scan.
    int direction_changes = 0;
    int prev_sign = 0;
    for (int i = 1; i < n; ++i) {
        const double diff = values[i] - values[i - 1];
        const int s = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
        if (s != 0) {
            if (prev_sign != 0 && s != prev_sign) ++direction_changes;
            prev_sign = s;
        }
    }
    if (direction_changes != 1)
        throw IntegrityError("find_theta0: " + std::to_string(direction_changes) +
                             " sign changes of h' detected, contradicts uniqueness");

    // Golden-section refinement of the bracket.
    double a = thetas[best_i - 1], b = thetas[best_i + 1];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = h_profile(c), fd = h_profile(d);
    for (int it = 0; it < 120 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc; c = b - invphi * (b - a); fc = h_profile(c);
        } else {
            a = c; c = d; fc = fd; d = a + invphi * (b - a); fd = h_profile(d);
        }
    }

    // Bisection on h' for the stationarity certificate.
    double la = std::max(1e-3, a - 1e-4), lb = std::min(1e3, b + 1e-4);
    double ga = h_profile_d1(la), gb = h_profile_d1(lb);
    for (int guard = 0; (ga > 0 || gb < 0) && guard < 60; ++guard) {
        la = std::max(1e-3, 0.9 * la);
        lb = std::min(1e3, 1.1 * lb);
        ga = h_profile_d1(la);
        gb = h_profile_d1(lb);
    }
    if (ga > 0 || gb < 0)
        throw IntegrityError("find_theta0: failed to bracket the sign change of h'");
    double mid = 0.5 * (la + lb);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (la + lb);
        const double gm = h_profile_d1(mid);
        if (std::abs(gm) <= 1e-9 || (lb - la) < 1e-14) break;
        if ((gm < 0) == (ga < 0)) { la = mid; ga = gm; } else { lb = mid; gb = gm; }
    }
    Theta0 result{mid, h_profile(mid), h_profile_d2(mid)};
    if (std::abs(h_profile_d1(result.theta0)) > 1e-8)
        throw IntegrityError("find_theta0: |h'(theta0)| tolerance not met");
    if (!(result.h_second > 0))
        throw IntegrityError("find_theta0: h''(theta0) <= 0 contradicts nondegeneracy");
    return result;
}

const Theta0& theta0() {
    static Theta0 cached = find_theta0();
    return cached;
}

ProfileTable ProfileTable::build(int n_samples, double lo, double hi) {
    ProfileTable tab;
    tab.theta.resize(n_samples);
    tab.h.resize(n_samples);
    tab.h1.resize(n_samples);
    tab.h2.resize(n_samples);
    tab.v.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double th = lo * std::pow(hi / lo, static_cast<double>(i) / (n_samples - 1));
        tab.theta[i] = th;
        tab.h[i] = h_profile(th);
        tab.h1[i] = h_profile_d1(th);
        tab.h2[i] = h_profile_d2(th);
        tab.v[i] = v_profile(th);
    }
    const Theta0& t0 = ::sinhp::theta0();
    tab.theta0 = t0.theta0;
    tab.h_theta0 = t0.h_value;
    return tab;
}

double robin_expansion(double lambda, double d, double kappa) {
    const double th = lambda * d;
    if (!(th >= 1e-3 && th <= 1e3))
        throw DomainError("robin_expansion: lambda*d = " + std::to_string(th) +
                          " outside tabulated range [1e-3, 1e3]");
    return -4.0 * std::log(lambda) + h_profile(th) + kappa * v_profile(th) / lambda;
}

} // namespace sinhp
