#include "sinhp/pipeline.hpp"

#include "sinhp/asymptotics.hpp"
#include "sinhp/csv.hpp"
#include "sinhp/errors.hpp"
#include "sinhp/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

namespace sinhp {

namespace {

using nlohmann::json;

std::vector<std::pair<std::string, std::string>> metadata(const RunConfig& cfg) {
    return {{"tool", "sinhp"},
            {"version", version_string},
            {"config_hash", cfg.hash()},
            {"seed", std::to_string(cfg.seed)},
            {"theta0", format_double(theta0().theta0)},
            {"c_gamma", format_double(halfplane_c_gamma())}};
}

json metadata_json(const RunConfig& cfg) {
    json m;
    for (const auto& [k, v] : metadata(cfg)) m[k] = v;
    return m;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    f << j.dump(2) << "\n";
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

/// Concentration points: explicit coordinates or phi_m minimization.
MinimizeResult locate_points(const Domain& domain, const RunConfig& cfg, double lambda,
                             const GreenEngine& engine) {
    const SpinConfig spins(cfg.spins);
    if (!cfg.explicit_points.empty()) {
        MinimizeResult r{ConcentrationConfig(cfg.explicit_points, spins, lambda), 0.0, false, 0, {}};
        r.config.validate(domain);
        r.phi = phi_m(r.config, engine);
        return r;
    }
    const FeasibleSet feasible = cfg.make_feasible_set(domain);
    MinimizeOptions opt;
    opt.n_starts = cfg.opt_starts;
    opt.max_iterations = cfg.opt_max_iterations;
    opt.seed = cfg.seed;
    return minimize(domain, spins, feasible, lambda, engine, opt);
}

struct PipelineRun {
    double epsilon, lambda;
    SolveReport report;
    double phi = 0.0;
    double energy_U = 0.0;
    double prediction = 0.0;
    double gap_rel = 0.0;
    double residual_star = 0.0;
    std::vector<Point> points;
    std::vector<double> masses;
};

PipelineRun solve_pipeline(const std::shared_ptr<const Grid>& grid,
                           const std::shared_ptr<const GreenEngine>& engine, const RunConfig& cfg,
                           const MinimizeResult& located, double epsilon, double lambda) {
    PipelineRun out;
    out.epsilon = epsilon;
    out.lambda = lambda;
    out.phi = located.phi;

    ConcentrationConfig config = located.config;
    compute_masses(config, *engine, cfg.make_mass_rule());
    out.points = config.xi;
    out.masses = config.mu;

    NewtonOptions nopt;
    nopt.tol_rel = cfg.newton_tol_rel;
    nopt.max_iterations = cfg.newton_max_iterations;

    Params params(epsilon, lambda, cfg.alpha, cfg.eps0);
    SolveReport rep = solve_with_continuation(grid, engine, config, params, nopt);
    concentration_report(rep, config);
    const double rho = params.rho();
    // Star norm of the scaled residual of the converged solution.
    if (rep.converged) {
        Field r(grid);
        RobinOperator op(grid, lambda);
        Field Au = op.apply(rep.solution);
        for (int i : grid->interior_indices()) {
            const double le = 2.0 * std::log(epsilon);
            const double au = std::abs(rep.solution.values[i]);
            const double s = std::exp(le + au) - std::exp(le - au);
            const double sinh_term = rep.solution.values[i] >= 0 ? s : -s;
            r.values[i] = rho * rho * (-Au.values[i] + sinh_term);
        }
        rep.final_residual_star = star_norm(r, config, rho, cfg.sigma);
    }

    AnsatzBundle bundle = build_ansatz(grid, config, params, engine);
    out.energy_U = ansatz_energy(bundle);
    out.prediction = reduced_energy_prediction(config.m(), rho, lambda, out.phi);
    const double scale = 16.0 * std::numbers::pi * config.m() *
                         std::abs(std::log(rho * lambda * lambda));
    out.gap_rel = std::abs(out.energy_U - out.prediction) / scale;
    rep.energy_J = out.energy_U;
    rep.predicted_energy = out.prediction;
    rep.energy_gap = out.gap_rel;
    out.residual_star = rep.final_residual_star;
    out.report = std::move(rep);
    return out;
}

json run_to_json(const PipelineRun& r, const RunConfig& cfg) {
    json j;
    j["epsilon"] = r.epsilon;
    j["lambda"] = r.lambda;
    j["converged"] = r.report.converged;
    j["iterations"] = r.report.iterations;
    j["seed_residual_inf"] = r.report.seed_residual_inf;
    j["final_residual_inf"] = r.report.final_residual_inf;
    j["final_residual_star"] = r.report.final_residual_star;
    j["sup_u"] = r.report.solution.sup_norm();
    j["phi_m"] = r.phi;
    j["energy_ansatz"] = r.energy_U;
    j["predicted_energy"] = r.prediction;
    j["energy_gap_rel"] = r.gap_rel;
    j["continuation_rungs"] = r.report.continuation_rungs;
    j["peaks_ok"] = r.report.peaks_ok;
    j["concentration"] = r.report.concentration_message;
    json pts = json::array(), mus = json::array(), pks = json::array();
    for (const auto& p : r.points) pts.push_back({p.x(), p.y()});
    for (double m : r.masses) mus.push_back(m);
    for (const auto& p : r.report.peaks) {
        json pk;
        pk["x"] = p.position.x();
        pk["y"] = p.position.y();
        pk["value"] = p.value;
        pk["spin"] = p.spin;
        pk["lambda_d"] = p.lambda_d;
        pk["lambda_d_over_theta0"] = p.lambda_d / theta0().theta0;
        pk["dist_to_xi"] = p.dist_to_xi;
        pk["matched_center"] = p.matched_center;
        pks.push_back(pk);
    }
    j["points"] = pts;
    j["masses"] = mus;
    j["peaks"] = pks;
    j["metadata"] = metadata_json(cfg);
    return j;
}

// ---------------------------------------------------------------------------

void run_theta0(const RunConfig& cfg) {
    const Theta0 t0 = find_theta0();
    json j;
    j["theta0"] = t0.theta0;
    j["h_theta0"] = t0.h_value;
    j["h2_theta0"] = t0.h_second;
    j["metadata"] = metadata_json(cfg);
    write_json(out_path(cfg, "theta0.json"), j);
}

void run_green_table(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading);
    if (cfg.green_sources.empty())
        throw ConfigError("green-table: green.sources must list at least one source point");
    std::vector<Point> targets = cfg.green_targets;
    if (targets.empty()) {
        for (int i = 0; i < 16; ++i) {
            const double t = 2.0 * std::numbers::pi * i / 16.0;
            const double c = 0.55 * domain.boundary_radius(t);
            targets.emplace_back(c * std::cos(t), c * std::sin(t));
        }
    }
    CsvWriter csv(out_path(cfg, "green_table.csv"),
                  {"lambda", "xi1", "xi2", "x1", "x2", "G", "H"}, metadata(cfg));
    for (double lambda : cfg.lambda_list) {
        auto engine = make_green_engine(domain, lambda, grid);
        for (const Point& xi : cfg.green_sources) {
            for (const Point& x : targets) {
                if ((x - xi).norm() < 1e-12) continue;
                const double H = engine->regular_part(x, xi);
                const double G = fundamental(x, xi) + H;
                csv.row({format_double(lambda), format_double(xi.x()), format_double(xi.y()),
                         format_double(x.x()), format_double(x.y()), format_double(G),
                         format_double(H)});
            }
        }
    }
}

void run_robin_profile(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading);
    CsvWriter csv(out_path(cfg, "robin_profile.csv"),
                  {"lambda", "d", "lambda_d", "H_numeric", "expansion", "diff"}, metadata(cfg));
    const Point anchor(domain.boundary_radius(0.0), 0.0);
    const Point nu = domain.outward_normal(anchor, 1e-9);
    const double kappa = domain.mean_curvature(anchor, 1e-9);
    for (double lambda : cfg.lambda_list) {
        auto engine = make_green_engine(domain, lambda, grid);
        const int n_probe = 16;
        for (int i = 0; i < n_probe; ++i) {
            // Chebyshev-distributed lambda*d over [0.5, 2]
            const double c = std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * n_probe));
            const double ld = 1.25 + 0.75 * c;
            const double d = ld / lambda;
            const Point x = anchor - d * nu;
            const double Hnum = engine->robin_function(x);
            const double Hexp = robin_expansion(lambda, d, kappa);
            csv.row({format_double(lambda), format_double(d), format_double(ld),
                     format_double(Hnum), format_double(Hexp), format_double(Hnum - Hexp)});
        }
    }
}

void run_hamiltonian_min(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading);
    json all = json::array();
    std::vector<std::string> cols{"lambda", "start", "iteration"};
    for (int j = 0; j < cfg.m; ++j) {
        cols.push_back("x" + std::to_string(j + 1));
        cols.push_back("y" + std::to_string(j + 1));
    }
    cols.push_back("phi");
    cols.push_back("margin");
    CsvWriter trace(out_path(cfg, "hamiltonian_trace.csv"), cols, metadata(cfg));

    for (double lambda : cfg.lambda_list) {
        auto engine = make_green_engine(domain, lambda, grid);
        MinimizeResult res = locate_points(domain, cfg, lambda, *engine);
        ConcentrationConfig config = res.config;
        const MassReport masses = compute_masses(config, *engine, cfg.make_mass_rule());

        json j;
        j["lambda"] = lambda;
        j["phi"] = res.phi;
        j["boundary_minimum_warning"] = res.boundary_minimum_warning;
        j["best_start"] = res.best_start;
        j["mass_bounds_ok"] = masses.bounds_ok;
        json pts = json::array(), lds = json::array(), mus = json::array();
        for (const auto& p : config.xi) {
            pts.push_back({p.x(), p.y()});
            lds.push_back(lambda * domain.distance_to_boundary(p) / theta0().theta0);
        }
        for (double mu : config.mu) mus.push_back(mu);
        j["points"] = pts;
        j["lambda_d_over_theta0"] = lds;
        j["masses"] = mus;
        all.push_back(j);

        for (const auto& row : res.trace) {
            std::vector<std::string> cells{format_double(lambda), std::to_string(row.start),
                                           std::to_string(row.iteration)};
            for (const auto& p : row.xi) {
                cells.push_back(format_double(p.x()));
                cells.push_back(format_double(p.y()));
            }
            cells.push_back(format_double(row.phi));
            cells.push_back(format_double(row.margin));
            trace.row(cells);
        }
    }
    json top;
    top["results"] = all;
    top["metadata"] = metadata_json(cfg);
    write_json(out_path(cfg, "hamiltonian_min.json"), top);
}

void run_ansatz_check(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    const std::optional<double> lmax =
        cfg.lambda_max_check
            ? std::optional<double>(*std::max_element(cfg.lambda_list.begin(),
                                                      cfg.lambda_list.end()))
            : std::nullopt;
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading, lmax);
    CsvWriter csv(out_path(cfg, "ansatz_check.csv"),
                  {"epsilon", "lambda", "residual_star", "ratio_eps_lambda7_log",
                   "corrector_gap", "boundary_defect"},
                  metadata(cfg));
    for (double lambda : cfg.lambda_list) {
        auto engine = make_green_engine(domain, lambda, grid);
        MinimizeResult located = locate_points(domain, cfg, lambda, *engine);
        ConcentrationConfig config = located.config;
        compute_masses(config, *engine, cfg.make_mass_rule());
        for (double eps : cfg.epsilon_list) {
            Params params(eps, lambda, cfg.alpha, cfg.eps0);
            AnsatzBundle bundle = build_ansatz(grid, config, params, engine);
            const double rnorm = residual_star_norm(bundle, cfg.sigma);
            const double bound = eps * std::pow(lambda, 7) * std::log(lambda);
            const double gap = corrector_gap(grid, *engine, config, params, 0);
            csv.row({format_double(eps), format_double(lambda), format_double(rnorm),
                     format_double(rnorm / bound), format_double(gap),
                     format_double(bundle.max_boundary_defect)});
        }
    }
}

void write_solution_field(const RunConfig& cfg, const std::string& name, const Field& u) {
    CsvWriter csv(out_path(cfg, name), {"x1", "x2", "u"}, metadata(cfg));
    for (int i = 0; i < u.size(); ++i) {
        const Point& x = u.grid->node(i);
        csv.row({format_double(x.x()), format_double(x.y()), format_double(u.values[i])});
    }
}

void run_solve(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    const std::optional<double> lmax =
        cfg.lambda_max_check ? std::optional<double>(cfg.lambda_list.front()) : std::nullopt;
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading, lmax);
    const double lambda = cfg.lambda_list.front();
    const double eps = cfg.epsilon_list.front();
    auto engine = make_green_engine(domain, lambda, grid);
    MinimizeResult located = locate_points(domain, cfg, lambda, *engine);
    PipelineRun run = solve_pipeline(grid, engine, cfg, located, eps, lambda);
    write_json(out_path(cfg, "solve_report.json"), run_to_json(run, cfg));
    if (cfg.write_fields) write_solution_field(cfg, "solution_field.csv", run.report.solution);
    if (!run.report.converged) throw SolverError("solve: Newton did not converge");
}

void run_sweep(const RunConfig& cfg) {
    const Domain domain = cfg.make_domain();
    const std::optional<double> lmax =
        cfg.lambda_max_check
            ? std::optional<double>(*std::max_element(cfg.lambda_list.begin(),
                                                      cfg.lambda_list.end()))
            : std::nullopt;
    auto grid = build_grid(domain, cfg.n_radial, cfg.n_angular, cfg.grading, lmax);

    // Locate points once per lambda (deterministic), then fan out solves.
    std::vector<std::shared_ptr<const GreenEngine>> engines;
    std::vector<MinimizeResult> located;
    for (double lambda : cfg.lambda_list) {
        engines.push_back(make_green_engine(domain, lambda, grid));
        located.push_back(locate_points(domain, cfg, lambda, *engines.back()));
    }

    struct Task {
        size_t il, ie;
    };
    std::vector<Task> tasks;
    for (size_t il = 0; il < cfg.lambda_list.size(); ++il)
        for (size_t ie = 0; ie < cfg.epsilon_list.size(); ++ie) tasks.push_back({il, ie});

    std::vector<PipelineRun> runs(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const auto [il, ie] = tasks[i];
            try {
                runs[i] = solve_pipeline(grid, engines[il], cfg, located[il],
                                         cfg.epsilon_list[ie], cfg.lambda_list[il]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(tasks.size())));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    CsvWriter csv(out_path(cfg, "sweep_summary.csv"),
                  {"epsilon", "lambda", "converged", "iterations", "sup_u", "lambda_d_peaks",
                   "energy", "prediction", "gap_rel"},
                  metadata(cfg));
    bool any_failed = false;
    for (size_t i = 0; i < tasks.size(); ++i) {
        const auto [il, ie] = tasks[i];
        if (!errors[i].empty()) {
            any_failed = true;
            csv.row({format_double(cfg.epsilon_list[ie]), format_double(cfg.lambda_list[il]),
                     "error", "0", "nan", "", "nan", "nan", "nan"});
            continue;
        }
        const PipelineRun& r = runs[i];
        std::string lds;
        for (size_t p = 0; p < r.report.peaks.size(); ++p)
            lds += (p ? ";" : "") + format_double(r.report.peaks[p].lambda_d);
        csv.row({format_double(r.epsilon), format_double(r.lambda),
                 r.report.converged ? "1" : "0", std::to_string(r.report.iterations),
                 format_double(r.report.solution.sup_norm()), lds, format_double(r.energy_U),
                 format_double(r.prediction), format_double(r.gap_rel)});
        write_json(out_path(cfg, "sweep_report_" + std::to_string(i) + ".json"),
                   run_to_json(r, cfg));
        any_failed = any_failed || !r.report.converged || !r.report.peaks_ok;
    }
    if (any_failed)
        throw SolverError("sweep: at least one run failed (completed artifacts were kept)");
}

} // namespace

int run_subcommand(const std::string& subcommand, const RunConfig& cfg) {
    try {
        if (subcommand == "theta0") run_theta0(cfg);
        else if (subcommand == "green-table") run_green_table(cfg);
        else if (subcommand == "robin-profile") run_robin_profile(cfg);
        else if (subcommand == "hamiltonian-min") run_hamiltonian_min(cfg);
        else if (subcommand == "ansatz-check") run_ansatz_check(cfg);
        else if (subcommand == "solve") run_solve(cfg);
        else if (subcommand == "sweep") run_sweep(cfg);
        else {
            std::cerr << "unknown subcommand '" << subcommand << "'\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace sinhp
