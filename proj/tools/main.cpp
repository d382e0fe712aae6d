#include "sinhp/config.hpp"
#include "sinhp/errors.hpp"
#include "sinhp/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"sinhp: boundary-concentrating solutions of the sinh-Poisson equation "
                 "with Robin boundary condition"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    const std::vector<std::string> names = {"theta0",        "green-table", "robin-profile",
                                            "hamiltonian-min", "ansatz-check", "solve",
                                            "sweep"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "random seed (overrides config)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        sinhp::RunConfig cfg = sinhp::parse_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed) cfg.seed = *seed;
        return sinhp::run_subcommand(sub, cfg);
    } catch (const sinhp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
