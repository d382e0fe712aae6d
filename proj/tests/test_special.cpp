#include <doctest.h>

#include "sinhp/special.hpp"

#include <cmath>

using namespace sinhp;

TEST_CASE("gauss-laguerre integrates monomials exactly") {
    // ∫_0^∞ e^{-t} t^k dt = k!
    const LaguerreRule& rule = gauss_laguerre(16);
    double fact = 1.0;
    for (int k = 0; k <= 12; ++k) {
        if (k > 0) fact *= k;
        double s = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i)
            s += rule.weights[i] * std::pow(rule.nodes[i], k);
        CHECK(std::abs(s - fact) < 1e-9 * fact);
    }
}

TEST_CASE("adaptive laguerre: rational integrand against E1") {
    // ∫_0^∞ e^{-t}/(1+t) dt = e E1(1)
    auto q = integrate_laguerre([](double t) { return 1.0 / (1.0 + t); }, 1e-13, 64, 512);
    CHECK(q.converged);
    CHECK(std::abs(q.value - std::exp(1.0) * 0.21938393439552027) < 1e-11);
}

TEST_CASE("exponential integral: series and continued-fraction branches") {
    // reference values computed with 30-digit arithmetic
    CHECK(std::abs(expint_e1(0.5) - 0.55977359477616081) < 1e-14);
    CHECK(std::abs(expint_e1(1.0) - 0.21938393439552027) < 1e-14);
    CHECK(std::abs(expint_e1(2.0) - 0.048900510708061120) < 1e-14);
    CHECK(std::abs(expint_e1(10.0) - 4.1569689296853243e-6) < 1e-18);
    // branch continuity at the switch
    CHECK(std::abs(expint_e1_scaled(1.0 - 1e-12) - expint_e1_scaled(1.0 + 1e-12)) < 1e-10);
    CHECK_THROWS(expint_e1(0.0));
}
