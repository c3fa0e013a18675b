// hfclt: check densities, run the chi2 chain, verify bounds, cross-check
// against quadrature and Monte Carlo.

#include "hfclt/commands.hpp"
#include "hfclt/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Hermite-domain chi2 trajectories of normalized sums"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> densities;
    std::size_t n_max = 0;
    std::size_t dim = 0;
    std::string a_grid;
    std::string window;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format;
    double slope_tol = 0.0;
    bool flip_q = false;

    app.add_option("--config", config_path, "JSON config; flags override it");
    app.add_option("--density", densities, "density JSON file (repeatable)");
    app.add_option("--n-max", n_max, "last chain index");
    app.add_option("--dim", dim, "truncation dimension");
    app.add_option("--a-grid", a_grid, "comma-separated a values for verify");
    app.add_option("--window", window, "rate fit window lo:hi");
    app.add_option("--reps", reps, "Monte Carlo replications");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--format", format, "csv or json");
    app.add_option("--slope-tol", slope_tol, "allowed distance of the slope from its target");
    app.add_flag("--inject-q-sign-flip", flip_q)->group("");

    for (const char* name : {"check", "run", "verify", "oracle"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : hfclt::kExitIo;
    }

    hfclt::RunConfig cfg;
    try {
        if (!config_path.empty())
            cfg = hfclt::load_config(config_path);
        if (app.count("--density") > 0) {
            cfg.densities.clear();
            for (const auto& d : densities)
                cfg.densities.emplace_back(d);
        }
        if (app.count("--n-max") > 0)
            cfg.n_max = n_max;
        if (app.count("--dim") > 0)
            cfg.dim = dim;
        if (app.count("--a-grid") > 0) {
            cfg.a_grid.clear();
            std::stringstream ss(a_grid);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::size_t pos = 0;
                double v = 0.0;
                try {
                    v = std::stod(item, &pos);
                } catch (const std::exception&) {
                    pos = 0;
                }
                if (pos == 0 || pos != item.size())
                    throw hfclt::Error(hfclt::ErrorKind::InvalidConfig, "bad a-grid value '" + item + "'");
                cfg.a_grid.push_back(v);
            }
        }
        if (app.count("--window") > 0)
            cfg.window = hfclt::parse_window(window);
        if (app.count("--reps") > 0)
            cfg.reps = reps;
        if (app.count("--seed") > 0)
            cfg.seed = seed;
        if (app.count("--out") > 0)
            cfg.out = out;
        if (app.count("--format") > 0)
            cfg.format = format;
        if (app.count("--slope-tol") > 0)
            cfg.slope_tol = slope_tol;
        cfg.flip_q = flip_q;
    } catch (const hfclt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return hfclt::kExitIo;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    return hfclt::run_command(command, cfg, std::cout);
}
