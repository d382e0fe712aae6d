#include <doctest.h>

#include "sinhp/asymptotics.hpp"
#include "sinhp/errors.hpp"
#include "sinhp/special.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace sinhp;

namespace {

/// Adaptive Simpson on [a, b] (independent quadrature oracle).
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Refined trapezoid oracle on [0, T] (doubles panels until stable).
double trapezoid_oracle(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
    int n = 64;
    auto eval = [&](int panels) {
        const double h = (b - a) / panels;
        double s = 0.5 * (f(a) + f(b));
        for (int i = 1; i < panels; ++i) s += f(a + i * h);
        return s * h;
    };
    double prev = eval(n);
    for (int it = 0; it < 16; ++it) {
        n *= 2;
        const double cur = eval(n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace

TEST_CASE("h(0.5): first term vanishes; matches adaptive-Simpson oracle") {
    // h(1/2) = 8 ∫ e^{-t} log(1+t) dt; truncation at t=60 adds < 1e-24
    const double oracle =
        8.0 * adaptive_simpson([](double t) { return std::exp(-t) * std::log(1.0 + t); }, 0.0,
                               60.0, 1e-13);
    CHECK(std::abs(h_profile(0.5) - oracle) < 1e-9);
    CHECK(std::abs(h_profile(0.5) - 4.7707788985855526) < 1e-10); // 30-digit reference
}

TEST_CASE("h asymptotics at the tabulation ends") {
    CHECK(std::abs(h_profile(1e3) - 4.0 * std::log(1e3)) < 10.0);
    CHECK(std::abs(h_profile(1e-3) + 4.0 * std::log(1e-3)) < 10.0);
    CHECK_THROWS_AS(h_profile(0.0), DomainError);
    CHECK_THROWS_AS(h_profile(-1.0), DomainError);
}

TEST_CASE("evaluation branches agree across the quadrature switch") {
    for (double th : {0.45, 0.48, 0.5, 0.52, 0.55}) {
        const double gl = h_profile(th);
        const double exact = 4.0 * std::log(2.0 * th) + 8.0 * expint_e1_scaled(2.0 * th);
        CHECK(std::abs(gl - exact) < 1e-11);
        const double vgl = v_profile(th);
        const double vexact = -6.0 * th + 8.0 * th * th * expint_e1_scaled(2.0 * th);
        CHECK(std::abs(vgl - vexact) < 1e-11);
    }
}

TEST_CASE("v: limit at zero, trapezoid oracle at one, asymptote at 1e3") {
    CHECK(std::abs(v_profile(1e-8)) < 1e-6);
    const double inner = trapezoid_oracle(
        [](double s) { return std::exp(-2.0 * s) / ((1.0 + s) * (1.0 + s)); }, 0.0, 50.0, 1e-11);
    const double oracle = -2.0 - 4.0 * inner; // theta = 1
    CHECK(std::abs(v_profile(1.0) - oracle) < 1e-8);
    CHECK(v_profile(1.0) < 0.0);
    CHECK(std::abs(v_profile(1e3) + 2e3 + 2.0) < 0.01);
    for (double th : {0.01, 0.1, 1.0, 10.0, 100.0}) CHECK(v_profile(th) < 0.0);
}

TEST_CASE("quadrature refinement: doubling the order is inert at 1e-10") {
    for (double th : {0.5, 2.0, 37.0}) {
        const LaguerreRule& r256 = gauss_laguerre(256);
        const LaguerreRule& r512 = gauss_laguerre(512);
        auto sum = [&](const LaguerreRule& r) {
            double s = 0.0;
            for (size_t i = 0; i < r.nodes.size(); ++i)
                s += r.weights[i] * std::log(2.0 * th + r.nodes[i]);
            return s;
        };
        CHECK(std::abs(sum(r256) - sum(r512)) < 1e-10);
    }
}

TEST_CASE("find_theta0 against a 1e6-point brute-force scan") {
    const Theta0 t0 = find_theta0();

    // dense log-spaced scan with a parabolic refinement of the argmin
    const int n = 1'000'000;
    const double lo = 1e-3, hi = 1e3;
    const double step = std::log(hi / lo) / (n - 1);
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    std::vector<double> cache(3, 0.0);
    for (int i = 0; i < n; ++i) {
        const double th = lo * std::exp(step * i);
        const double v = h_profile(th);
        if (v < best) { best = v; best_i = i; }
    }
    const double l0 = std::log(lo) + step * (best_i - 1);
    const double f0 = h_profile(std::exp(l0));
    const double f1 = h_profile(std::exp(l0 + step));
    const double f2 = h_profile(std::exp(l0 + 2 * step));
    const double lmin = l0 + step * (0.5 + (f0 - f1) / (f0 - 2 * f1 + f2));
    const double scan_theta0 = std::exp(lmin);

    CHECK(std::abs(t0.theta0 - scan_theta0) <= 1e-6);
    CHECK(t0.h_second > 0.0);
    CHECK(std::abs(t0.theta0 - 0.30502889591743718) < 1e-7);  // 30-digit reference
    CHECK(std::abs(t0.h_value - 4.5799495150980667) < 1e-8);
    CHECK(std::abs(t0.h_second - 16.764023944459782) < 1e-4);
}

TEST_CASE("theta0 minimality over random thetas") {
    const Theta0 t0 = theta0();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(std::log(1e-3), std::log(1e3));
    for (int i = 0; i < 1000; ++i) {
        const double th = std::exp(u(rng));
        CHECK(t0.h_value <= h_profile(th) + 1e-12);
    }
}

TEST_CASE("profile table: monotone bracketing around theta0") {
    const ProfileTable tab = ProfileTable::build(241);
    CHECK(std::abs(h_profile_d1(tab.theta0)) <= 1e-8);
    for (size_t i = 1; i < tab.theta.size(); ++i) {
        if (tab.theta[i] < tab.theta0) CHECK(tab.h[i] < tab.h[i - 1]);
        if (tab.theta[i - 1] > tab.theta0) CHECK(tab.h[i] > tab.h[i - 1]);
    }
    CHECK(tab.h.front() > tab.h_theta0);
    CHECK(tab.h.back() > tab.h_theta0);
}

TEST_CASE("robin_expansion: plane reduction, stationarity, domain guard") {
    const double lambda = 25.0;
    for (double ld : {0.5, 1.0, 2.0}) {
        const double d = ld / lambda;
        CHECK(robin_expansion(lambda, d, 0.0) ==
              doctest::Approx(-4.0 * std::log(lambda) + h_profile(ld)).epsilon(1e-14));
    }
    // leading part is stationary in d at lambda d = theta0
    const double d0 = theta0().theta0 / lambda;
    const double step = 1e-6;
    const double deriv = (robin_expansion(lambda, d0 + step, 0.0) -
                          robin_expansion(lambda, d0 - step, 0.0)) / (2.0 * step);
    CHECK(std::abs(deriv) < 1e-3 * lambda);
    CHECK_THROWS_AS(robin_expansion(lambda, 1e-9, 0.0), DomainError);
}
