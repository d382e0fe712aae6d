#include <doctest.h>

#include "sinhp/asymptotics.hpp"
#include "sinhp/errors.hpp"
#include "sinhp/solver.hpp"

#include <cmath>
#include <numbers>

using namespace sinhp;

namespace {

ConcentrationConfig located_pair(const GreenEngine& engine, double lambda) {
    const double d = theta0().theta0 / lambda;
    ConcentrationConfig cfg({Point(-1.0 + d, 0.0), Point(1.0 - d, 0.0)}, SpinConfig({1, -1}),
                            lambda);
    compute_masses(cfg, engine);
    return cfg;
}

} // namespace

TEST_CASE("newton: trivial fixed points") {
    const Domain disk = Domain::disk(1.0);
    auto grid = build_grid(disk, 24, 48);
    Params p(1e-3, 5.0);
    // seed = 0 solves the problem outright
    Field zero(grid);
    SolveReport rep = newton_solve(grid, p, zero);
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    CHECK(rep.solution.sup_norm() == 0.0);

    // seed = exact discrete solution converges immediately
    Field bump(grid);
    for (int i = 0; i < grid->n_nodes(); ++i)
        bump.values[i] = 0.5 * std::exp(-4.0 * grid->node(i).squaredNorm());
    SolveReport first = newton_solve(grid, p, bump);
    CHECK(first.converged);
    SolveReport again = newton_solve(grid, p, first.solution);
    CHECK(again.converged);
    CHECK(again.iterations <= 1);
}

TEST_CASE("energy: closed-form fields and refinement stability") {
    const Domain disk = Domain::disk(1.0);
    const double eps = 0.05, lambda = 3.0;
    const double area = std::numbers::pi;
    const double perimeter = 2.0 * std::numbers::pi;

    auto grid = build_grid(disk, 32, 64);
    Field zero(grid);
    CHECK(energy(zero, eps, lambda) == doctest::Approx(-2.0 * eps * eps * area).epsilon(1e-12));

    Field c(grid);
    c.values.setConstant(0.7);
    const double expected = -eps * eps * (std::exp(0.7) + std::exp(-0.7)) * area +
                            0.5 * lambda * 0.49 * perimeter;
    CHECK(energy(c, eps, lambda) == doctest::Approx(expected).epsilon(1e-12));

    // smooth field: value stabilizes to three digits under refinement
    auto eval = [&](int nr, int nt) {
        auto g = build_grid(disk, nr, nt);
        Field f(g);
        for (int i = 0; i < g->n_nodes(); ++i) {
            const Point& x = g->node(i);
            f.values[i] = std::sin(2.0 * x.x()) * std::exp(x.y());
        }
        return energy(f, eps, lambda);
    };
    const double e1 = eval(32, 64), e2 = eval(64, 128), e3 = eval(128, 256);
    CHECK(std::abs(e2 - e3) < std::abs(e1 - e2));
    CHECK(std::abs(e2 - e3) < 1e-3 * std::abs(e3));
}

TEST_CASE("reduced energy prediction: degenerate and linear structure") {
    CHECK(reduced_energy_prediction(0, 1e-4, 10.0, 5.0) == 0.0);
    const double one = reduced_energy_prediction(1, 1e-4, 10.0, 2.5);
    const double two = reduced_energy_prediction(2, 1e-4, 10.0, 5.0);
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-14));
}

TEST_CASE("ansatz energy matches the reduced expansion and improves with eps") {
    const Domain disk = Domain::disk(1.0);
    auto grid = build_grid(disk, 96, 192);
    const double lambda = 20.0;
    auto engine = make_green_engine(disk, lambda);
    ConcentrationConfig cfg = located_pair(*engine, lambda);
    const double phi = phi_m(cfg, *engine);
    double prev_rel = std::numeric_limits<double>::infinity();
    for (double eps : {1e-4, 1e-5}) {
        Params p(eps, lambda);
        AnsatzBundle b = build_ansatz(grid, cfg, p, engine);
        const double J = ansatz_energy(b);
        const double pred = reduced_energy_prediction(2, p.rho(), lambda, phi);
        const double scale =
            16.0 * std::numbers::pi * 2 * std::abs(std::log(p.rho() * lambda * lambda));
        const double rel = std::abs(J - pred) / scale;
        CHECK(rel <= 0.2);
        CHECK(rel < prev_rel);
        prev_rel = rel;
    }
}

TEST_CASE("end-to-end concentrating solve at moderate scale") {
    const Domain disk = Domain::disk(1.0);
    auto grid = build_grid(disk, 64, 128);
    const double lambda = 10.0;
    auto engine = make_green_engine(disk, lambda);
    ConcentrationConfig cfg = located_pair(*engine, lambda);

    Params p(1e-3, lambda);
    SolveReport rep = solve_with_continuation(grid, engine, cfg, p);
    CHECK(rep.converged);
    CHECK(rep.final_residual_inf <= 1e-9 * rep.seed_residual_inf);
    CHECK(rep.peaks_ok);
    REQUIRE(rep.peaks.size() == 2);
    for (const auto& pk : rep.peaks) {
        CHECK(pk.spin == cfg.spins.a[pk.matched_center]);
        CHECK(pk.dist_to_xi < 0.05);
        CHECK(pk.lambda_d / theta0().theta0 > 0.8);
        CHECK(pk.lambda_d / theta0().theta0 < 1.25);
    }

    // solution symmetry u(x1, -x2) = u(x1, x2) for the axis configuration
    double sym = 0.0;
    for (int i = 0; i < grid->n_nodes(); ++i) {
        const Point& x = grid->node(i);
        const int mirror = grid->nearest_node(Point(x.x(), -x.y()));
        sym = std::max(sym, std::abs(rep.solution.values[i] - rep.solution.values[mirror]));
    }
    CHECK(sym < 1e-7);

    // residual of the exact discrete solution through the scaled star norm
    Field r(grid);
    RobinOperator op(grid, lambda);
    Field Au = op.apply(rep.solution);
    const double rho = p.rho();
    for (int i : grid->interior_indices()) {
        const double u = rep.solution.values[i];
        const double s = std::exp(2.0 * std::log(p.epsilon) + std::abs(u)) -
                         std::exp(2.0 * std::log(p.epsilon) - std::abs(u));
        r.values[i] = rho * rho * (-Au.values[i] + (u >= 0 ? s : -s));
    }
    CHECK(star_norm(r, cfg, rho) <= 10.0 * 1e-9 * rep.seed_residual_inf);

    // sign antisymmetry: the flipped-spin problem yields the nodewise negation
    ConcentrationConfig flipped({cfg.xi[0], cfg.xi[1]}, SpinConfig({-1, 1}), lambda);
    compute_masses(flipped, *engine);
    SolveReport rep2 = solve_with_continuation(grid, engine, flipped, p);
    CHECK(rep2.converged);
    double anti = 0.0;
    for (int i = 0; i < grid->n_nodes(); ++i)
        anti = std::max(anti, std::abs(rep2.solution.values[i] + rep.solution.values[i]));
    CHECK(anti < 1e-8);

    // sup growth across eps halvings (concentration)
    double prev_sup = rep.solution.sup_norm();
    for (double eps : {5e-4, 2.5e-4}) {
        Params pe(eps, lambda);
        SolveReport re = solve_with_continuation(grid, engine, cfg, pe);
        CHECK(re.converged);
        CHECK(re.solution.sup_norm() > prev_sup);
        prev_sup = re.solution.sup_norm();
    }
}

TEST_CASE("concentration report: mismatch is surfaced, not hidden") {
    const Domain disk = Domain::disk(1.0);
    auto grid = build_grid(disk, 24, 48);
    ConcentrationConfig cfg({Point(0.5, 0.0)}, SpinConfig({1}), 10.0);
    SolveReport rep;
    rep.solution = Field(grid); // identically zero: no peaks to match
    concentration_report(rep, cfg);
    CHECK(!rep.peaks_ok);
    CHECK(rep.concentration_message.find("failure") != std::string::npos);
}
