#pragma once

#include <functional>

namespace sinhp_tests {

/// Sup of the 5-point residual lap_h f + g over a uniform Cartesian patch
/// [-L, L]^2 with n cells per side (scaled-variable diagnostics).
inline double patch_residual_sup(const std::function<double(double, double)>& f,
                                 const std::function<double(double, double)>& g, double L,
                                 int n) {
    const double h = 2.0 * L / n;
    double sup = 0.0;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            const double x = -L + i * h, y = -L + j * h;
            const double lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) -
                                4.0 * f(x, y)) / (h * h);
            sup = std::max(sup, std::abs(lap + g(x, y)));
        }
    }
    return sup;
}

} // namespace sinhp_tests
