#include <iostream>

#include <CLI11.hpp>

#include <confine/cli.hpp>

int main(int argc, char** argv) {
    using namespace confine::cli;
    RunConfig cfg;
    CLI::App app{"confine_lab: self-adjointness and stochastic completeness checks for drift-diffusion operators"};
    app.add_option("command", cfg.command, "classify | oracle | simulate | hardy | sweep | report")
        ->required()
        ->check(CLI::IsMember(commands()));
    app.add_option("--profile", cfg.profile, "profile TOML file");
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--beta", cfg.beta, "sweep range lo:hi:step");
    app.add_option("--gamma", cfg.gamma, "sweep range lo:hi:step");
    app.add_option("--grid-levels", cfg.grid_levels, "grids (simulate) or dyadic levels (hardy)");
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--tol", cfg.tol, "override a default, key=value (repeatable)");
    app.add_option("--component", cfg.component, "boundary component id")->capture_default_str();
    app.add_flag("--simulate", cfg.simulate, "sweep: add extrapolated simulator retention");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return InputError;
    }
    return dispatch(cfg, std::cout, std::cerr);
}
