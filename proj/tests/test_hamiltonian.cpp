#include <doctest.h>

#include "sinhp/asymptotics.hpp"
#include "sinhp/errors.hpp"
#include "sinhp/hamiltonian.hpp"

#include <cmath>

using namespace sinhp;

namespace {

ConcentrationConfig axis_config(double t1, double t2, double lambda) {
    return ConcentrationConfig({Point(t1, 0.0), Point(t2, 0.0)}, SpinConfig({1, -1}), lambda);
}

} // namespace

TEST_CASE("phi_m reductions and symmetries") {
    auto engine = make_green_engine(Domain::disk(1.0), 20.0);

    // m = 1: empty interaction sum
    ConcentrationConfig single({Point(0.3, 0.1)}, SpinConfig({1}), 20.0);
    CHECK(phi_m(single, *engine) == doctest::Approx(engine->robin_function(Point(0.3, 0.1))));

    // m = 2 mixed spins: H + H - 2G
    ConcentrationConfig pair = axis_config(-0.9, 0.9, 20.0);
    const double expected = engine->robin_function(Point(-0.9, 0.0)) +
                            engine->robin_function(Point(0.9, 0.0)) -
                            2.0 * engine->green(Point(-0.9, 0.0), Point(0.9, 0.0));
    CHECK(phi_m(pair, *engine) == doctest::Approx(expected).epsilon(1e-12));

    // permutation of (xi, a) pairs leaves phi unchanged
    ConcentrationConfig swapped({Point(0.9, 0.0), Point(-0.9, 0.0)}, SpinConfig({-1, 1}), 20.0);
    CHECK(phi_m(swapped, *engine) == doctest::Approx(phi_m(pair, *engine)).epsilon(1e-13));

    // reflection invariance on the symmetric domain
    ConcentrationConfig cfg({Point(0.3, 0.45), Point(-0.5, -0.2)}, SpinConfig({1, -1}), 20.0);
    ConcentrationConfig mirrored({Point(0.3, -0.45), Point(-0.5, 0.2)}, SpinConfig({1, -1}), 20.0);
    CHECK(phi_m(cfg, *engine) == doctest::Approx(phi_m(mirrored, *engine)).epsilon(1e-12));

    CHECK_THROWS_AS(
        phi_m(ConcentrationConfig({Point(0.1, 0.0), Point(0.1, 0.0)}, SpinConfig({1, -1}), 20.0),
              *engine),
        SingularityError);
}

TEST_CASE("mass rule: single bubble matches the boundary-layer prediction") {
    const double lambda = 40.0;
    auto engine = make_green_engine(Domain::disk(1.0), lambda);
    const double d = theta0().theta0 / lambda;
    ConcentrationConfig cfg({Point(1.0 - d, 0.0)}, SpinConfig({1}), lambda);
    MassReport rep = compute_masses(cfg, *engine);
    CHECK(cfg.masses_computed);
    // log(8 mu^2) = H(xi,xi) + 4 log lambda ~= h(theta0) up to the kappa v / lambda term
    CHECK(std::abs(std::log(8.0 * rep.mu[0] * rep.mu[0]) - theta0().h_value) < 0.1);
    CHECK(rep.bounds_ok);

    // permutation equivariance and reflection invariance of the masses
    ConcentrationConfig two({Point(0.3, 0.4), Point(0.3, -0.4)}, SpinConfig({1, -1}), lambda);
    compute_masses(two, *engine);
    ConcentrationConfig mirrored({Point(0.3, -0.4), Point(0.3, 0.4)}, SpinConfig({-1, 1}), lambda);
    compute_masses(mirrored, *engine);
    CHECK(two.mu[0] == doctest::Approx(mirrored.mu[1]).epsilon(1e-13));
    CHECK(two.mu[1] == doctest::Approx(mirrored.mu[0]).epsilon(1e-13));
}

TEST_CASE("mass rule: direct re-evaluation and the two interaction modes") {
    const Domain disk = Domain::disk(1.0);
    for (double lambda : {20.0, 40.0}) {
        auto engine = make_green_engine(disk, lambda);
        const double d = theta0().theta0 / lambda;
        ConcentrationConfig cfg = axis_config(-1.0 + d, 1.0 - d, lambda);
        MassReport rep = compute_masses(cfg, *engine, MassRule::as_written);
        for (int j = 0; j < 2; ++j) {
            double rhs = engine->robin_function(cfg.xi[j]) + 4.0 * std::log(lambda);
            const int i = 1 - j;
            rhs += cfg.spins.a[i] * engine->green(cfg.xi[i], cfg.xi[j]);
            CHECK(std::log(8.0 * rep.mu[j] * rep.mu[j]) == doctest::Approx(rhs).epsilon(1e-12));
        }
        // the two modes agree on the positive bubble and differ by -2G on the
        // negative one (weight a_0 = +1 flips to a_0 a_1 = -1)
        ConcentrationConfig cfg2 = axis_config(-1.0 + d, 1.0 - d, lambda);
        MassReport rep2 = compute_masses(cfg2, *engine, MassRule::spin_product);
        const double G = engine->green(cfg.xi[0], cfg.xi[1]);
        CHECK(rep2.mu[0] == doctest::Approx(rep.mu[0]).epsilon(1e-13));
        CHECK(std::log(8.0 * rep2.mu[1] * rep2.mu[1]) - std::log(8.0 * rep.mu[1] * rep.mu[1]) ==
              doctest::Approx(-2.0 * G).epsilon(1e-9));
    }
}

TEST_CASE("mass overflow error for nearly coincident attracting points") {
    auto engine = make_green_engine(Domain::disk(1.0), 20.0);
    ConcentrationConfig cfg({Point(1e-80, 0.0), Point(2e-80, 0.0)}, SpinConfig({1, 1}), 20.0);
    CHECK_THROWS_AS(compute_masses(cfg, *engine), MassOverflowError);
}

TEST_CASE("grad_phi_m: symmetry and secant oracle") {
    const double lambda = 40.0;
    auto engine = make_green_engine(Domain::disk(1.0), lambda);
    const double d = theta0().theta0 / lambda;
    ConcentrationConfig cfg = axis_config(-1.0 + d, 1.0 - d, lambda);

    auto grad = grad_phi_m(cfg, *engine);
    CHECK(std::abs(grad[0].y()) < 1e-4);
    CHECK(std::abs(grad[1].y()) < 1e-4);

    const Point dir(0.6, -0.8);
    const double t = 1e-4 * d;
    ConcentrationConfig up = cfg, dn = cfg;
    up.xi[0] += t * dir;
    dn.xi[0] -= t * dir;
    const double secant = (phi_m(up, *engine) - phi_m(dn, *engine)) / (2.0 * t);
    const double directional = grad[0].dot(dir);
    CHECK(std::abs(secant - directional) <= 1e-3 * std::max(1.0, std::abs(secant)));
}

TEST_CASE("minimize: disk axis mode against the dense 2d scan oracle") {
    const double lambda = 40.0;
    const Domain disk = Domain::disk(1.0);
    auto engine = make_green_engine(disk, lambda);
    const FeasibleSet feasible = FeasibleSet::axis(disk);
    MinimizeOptions opt;
    opt.seed = 7;
    MinimizeResult res = minimize(disk, SpinConfig({1, -1}), feasible, lambda, *engine, opt);

    CHECK(!res.boundary_minimum_warning);
    CHECK(!res.trace.empty());
    const double th0 = theta0().theta0;
    for (const auto& p : res.config.xi) {
        CHECK(std::abs(p.y()) < 1e-12); // on the axis
        const double ld = lambda * disk.distance_to_boundary(p);
        CHECK(ld / th0 > 0.9);
        CHECK(ld / th0 < 1.1);
    }
    CHECK(res.config.xi[0].x() * res.config.xi[1].x() < 0.0); // opposite sides

    // dense scan over (t1, t2), log-spaced distances per side
    const double K = feasible.K;
    const double llo = std::log(1.0 / (K * lambda)), lhi = std::log(K / lambda);
    double best = std::numeric_limits<double>::infinity();
    double bt1 = 0, bt2 = 0;
    for (int i = 0; i < 60; ++i) {
        const double d1 = std::exp(llo + (lhi - llo) * i / 59.0);
        for (int j = 0; j < 60; ++j) {
            const double d2 = std::exp(llo + (lhi - llo) * j / 59.0);
            ConcentrationConfig cfg = axis_config(-1.0 + d1, 1.0 - d2, lambda);
            if (!feasible.contains(disk, cfg.xi, lambda)) continue;
            const double v = phi_m(cfg, *engine);
            if (v < best) { best = v; bt1 = -1.0 + d1; bt2 = 1.0 - d2; }
        }
    }
    CHECK(std::abs(res.config.xi[0].x() - bt1) < 0.02);
    CHECK(std::abs(res.config.xi[1].x() - bt2) < 0.02);
    CHECK(res.phi <= best + 1e-9);

    // first-order condition at the reported minimizer
    auto grad = grad_phi_m(res.config, *engine);
    CHECK(std::hypot(grad[0].x(), grad[1].x()) < 1.0);

    // sampled feasible-set boundary stays above the interior minimum
    for (double ld : {1.0 / K, K}) {
        for (double side : {-1.0, 1.0}) {
            ConcentrationConfig cfg =
                side < 0 ? axis_config(-1.0 + ld / lambda, res.config.xi[1].x(), lambda)
                         : axis_config(res.config.xi[0].x(), 1.0 - ld / lambda, lambda);
            CHECK(phi_m(cfg, *engine) > res.phi);
        }
    }
}

TEST_CASE("minimize: annulus per-component mode") {
    const double lambda = 40.0;
    const Domain ann = Domain::annulus(0.5, 1.0);
    auto engine = make_green_engine(ann, lambda);
    const FeasibleSet feasible = FeasibleSet::per_component(ann, {0, 1});
    MinimizeOptions opt;
    opt.seed = 3;
    MinimizeResult res = minimize(ann, SpinConfig({1, -1}), feasible, lambda, *engine, opt);

    const double th0 = theta0().theta0;
    CHECK(std::abs(res.config.xi[0].norm() - 1.0) < 3.0 / lambda); // outer component
    CHECK(std::abs(res.config.xi[1].norm() - 0.5) < 3.0 / lambda); // inner component
    for (const auto& p : res.config.xi) {
        const double ld = lambda * ann.distance_to_boundary(p);
        CHECK(ld / th0 > 0.85);
        CHECK(ld / th0 < 1.2);
    }
}

TEST_CASE("minimize: single point sits on the theta0 fiber") {
    const double lambda = 30.0;
    const Domain disk = Domain::disk(1.0);
    auto engine = make_green_engine(disk, lambda);
    MinimizeResult res =
        minimize(disk, SpinConfig({1}), FeasibleSet::free_set(disk), lambda, *engine);
    const double ld = lambda * disk.distance_to_boundary(res.config.xi[0]);

    // 1d scan oracle along a normal fiber
    double best = std::numeric_limits<double>::infinity(), bld = 0;
    for (int i = 0; i < 4000; ++i) {
        const double l = std::exp(std::log(0.05) + (std::log(20.0) - std::log(0.05)) * i / 3999.0);
        ConcentrationConfig cfg({Point(1.0 - l / lambda, 0.0)}, SpinConfig({1}), lambda);
        const double v = phi_m(cfg, *engine);
        if (v < best) { best = v; bld = l; }
    }
    CHECK(ld == doctest::Approx(bld).epsilon(0.02));
    CHECK(ld / theta0().theta0 > 0.9);
    CHECK(ld / theta0().theta0 < 1.1);
}

TEST_CASE("minimize: star domain with the fd green engine") {
    const double lambda = 10.0;
    const Domain star = Domain::star({1.0, 0.0, 0.1});
    auto grid = build_grid(star, 64, 128);
    auto engine = make_green_engine(star, lambda, grid);
    CHECK(engine->backend_name() == "fd");
    MinimizeOptions opt;
    opt.n_starts = 4;
    opt.max_iterations = 150;
    // K = 4 keeps lambda*d inside the resolved part of the fd boundary layer
    MinimizeResult res =
        minimize(star, SpinConfig({1}), FeasibleSet::free_set(star, 4.0), lambda, *engine, opt);
    const double ld = lambda * star.distance_to_boundary(res.config.xi[0]);
    CHECK(ld / theta0().theta0 > 0.75);
    CHECK(ld / theta0().theta0 < 1.3);
}

TEST_CASE("minimize: determinism for a fixed seed") {
    const double lambda = 20.0;
    const Domain disk = Domain::disk(1.0);
    auto engine = make_green_engine(disk, lambda);
    MinimizeOptions opt;
    opt.seed = 99;
    MinimizeResult a =
        minimize(disk, SpinConfig({1, -1}), FeasibleSet::axis(disk), lambda, *engine, opt);
    MinimizeResult b =
        minimize(disk, SpinConfig({1, -1}), FeasibleSet::axis(disk), lambda, *engine, opt);
    CHECK(a.phi == b.phi);
    CHECK(a.config.xi[0].x() == b.config.xi[0].x());
    CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("feasible set: membership, margins, validation errors") {
    const Domain disk = Domain::disk(1.0);
    const FeasibleSet f = FeasibleSet::axis(disk);
    CHECK(f.delta_sep == doctest::Approx(0.5)); // (b - a)/4
    const double lambda = 40.0;
    const double d = theta0().theta0 / lambda;
    CHECK(f.contains(disk, {Point(-1.0 + d, 0.0), Point(1.0 - d, 0.0)}, lambda));
    CHECK(!f.contains(disk, {Point(-1.0 + d, 0.01), Point(1.0 - d, 0.0)}, lambda));
    CHECK(!f.contains(disk, {Point(-1.0 + 1e-5, 0.0), Point(1.0 - d, 0.0)}, lambda));
    CHECK(!f.contains(disk, {Point(0.9, 0.0), Point(0.95, 0.0)}, lambda));

    CHECK_THROWS_AS(FeasibleSet::axis(disk, 0.5), ConfigError);
    CHECK_THROWS_AS(FeasibleSet::per_component(disk, {0}), ConfigError);
    CHECK_THROWS_AS(FeasibleSet::per_component(Domain::annulus(0.5, 1.0), {0, 5}), ConfigError);
    CHECK_THROWS_AS(SpinConfig({1, 0}), ConfigError);
}
