#include "sinhp/special.hpp"

#include "sinhp/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

namespace sinhp {

namespace {

LaguerreRule compute_rule(int order) {
    // Golub–Welsch: eigen-decompose the symmetric Jacobi matrix of the
    // Laguerre recurrence (alpha_i = 2i+1, beta_i = i).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
    for (int i = 0; i < order; ++i) {
        J(i, i) = 2.0 * i + 1.0;
        if (i + 1 < order) {
            const double b = static_cast<double>(i + 1);
            J(i, i + 1) = b;
            J(i + 1, i) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    LaguerreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0; // mu_0 = ∫ e^{-t} dt = 1
    }
    return rule;
}

} // namespace

const LaguerreRule& gauss_laguerre(int order) {
    if (order < 1) throw QuadratureError("Gauss-Laguerre order must be >= 1");
    static std::map<int, LaguerreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

QuadratureResult integrate_laguerre(const std::function<double(double)>& f,
                                    double tol, int start_order, int max_order) {
    auto eval = [&](int order) {
        const LaguerreRule& rule = gauss_laguerre(order);
        double s = 0.0;
        for (int i = 0; i < order; ++i) s += rule.weights[i] * f(rule.nodes[i]);
        return s;
    };
    QuadratureResult res;
    double prev = eval(start_order);
    int order = start_order;
    while (order < max_order) {
        order *= 2;
        const double cur = eval(order);
        res.error_estimate = std::abs(cur - prev);
        res.value = cur;
        res.order = order;
        if (res.error_estimate <= tol * std::max(1.0, std::abs(cur))) {
            res.converged = true;
            return res;
        }
        prev = cur;
    }
    res.value = prev;
    res.order = order;
    return res;
}

double expint_e1(double x) {
    if (!(x > 0.0)) throw DomainError("E1(x) requires x > 0");
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0;
        double term = 1.0; // x^k / k!
        for (int k = 1; k <= 40; ++k) {
            term *= x / k;
            const double add = ((k % 2) ? term : -term) / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum))) break;
        }
        return -euler_gamma - std::log(x) + sum;
    }
    // Continued fraction (modified Lentz):
    // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x) * h;
}

double expint_e1_scaled(double x) {
    if (!(x > 0.0)) throw DomainError("E1(x) requires x > 0");
    if (x <= 1.0) return std::exp(x) * expint_e1(x);
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 200; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

} // namespace sinhp
