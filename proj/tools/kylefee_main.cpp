#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kylefee/pipelines.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Continuous-time insider-trading equilibrium with an order-flow fee"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string iter_limit = "auto";
    std::vector<double> kappas;
    std::uint64_t seed = 20260809ull;
    std::size_t grid_n = 0;
    int n_paths = 50000;
    int n_steps = 3960;
    bool dump_wealth = false;

    app.add_option("--config", config_path, "config file (key = value lines)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--kappa", kappas, "fee slopes to run")->delimiter(',');
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--iter-limit", iter_limit, "fixed-point rounds: auto or a count");
    app.add_option("--grid", grid_n, "override grid node count");
    app.add_option("--paths", n_paths, "Monte Carlo paths");
    app.add_option("--steps", n_steps, "Monte Carlo Euler steps");
    app.add_flag("--dump-wealth", dump_wealth, "write per-path terminal wealth");

    auto* c_solve = app.add_subcommand("solve", "equilibrium intensity per kappa");
    auto* c_tables = app.add_subcommand("tables", "informativeness and regulator tables");
    auto* c_figures = app.add_subcommand("figures", "figure data files");
    auto* c_simulate = app.add_subcommand("simulate", "Monte Carlo oracle runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        kylefee::RunManifest man;
        man.config = kylefee::parse_config_file(config_path);
        man.out_dir = out_dir;
        man.seed = seed;
        man.n_paths = n_paths;
        man.n_steps = n_steps;
        man.dump_wealth = dump_wealth;
        if (grid_n > 0) man.config.n_grid = grid_n;
        if (!kappas.empty())
            man.kappas = kappas;
        else if (c_simulate->parsed())
            man.kappas = {0.0, 0.045};
        if (iter_limit != "auto") man.iter_limit = std::stoi(iter_limit);

        if (c_solve->parsed()) {
            kylefee::cmd_solve(man);
        } else if (c_tables->parsed()) {
            kylefee::cmd_tables(man);
        } else if (c_figures->parsed()) {
            kylefee::cmd_figures(man);
        } else if (c_simulate->parsed()) {
            const int failures = kylefee::cmd_simulate(man);
            if (failures > 0) {
                std::cerr << failures << " oracle check(s) failed; see checks_*.csv\n";
                return 3;
            }
            std::cout << "all oracle checks passed\n";
        }
        return 0;
    } catch (const kylefee::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const kylefee::solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
