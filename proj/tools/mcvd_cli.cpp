// Command-line front end for the channel model: closed-form evaluation,
// Monte Carlo runs, analytic-vs-MC comparisons, and one-command figure
// reproduction.  Exit codes: 0 success, 2 configuration error, 3 comparison
// acceptance-threshold failure.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mcvd/harness.hpp"

namespace {

using mcvd::harness::ExperimentConfig;
using mcvd::harness::Mode;

// A --config file supplies the base configuration; flags given on the
// command line override individual fields.  The file path is pre-scanned so
// the loaded values can serve as the bound-variable defaults before CLI11
// parses the rest.
std::string prescan_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    ExperimentConfig cfg;
    std::string config_path;
    try {
        config_path = prescan_config_path(argc, argv);
        if (!config_path.empty()) cfg = ExperimentConfig::from_json_file(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::string absorption =
        cfg.simcfg.absorption_mode == mcvd::sim::AbsorptionMode::segment ? "segment" : "endpoint";
    std::string sweep_scale = cfg.sweep.log_scale ? "log" : "linear";
    std::string figure_name = cfg.figure;
    double target_p = cfg.detect.target_p.value_or(0.0);
    bool target_set = cfg.detect.target_p.has_value();
    double t_point = 0.0;
    bool t_point_set = false;

    CLI::App app{"Diffusion channel model with a Poisson field of absorbing receivers"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (flags override it)");
        cmd->add_option("--a_um,--a", cfg.params.a, "receiver radius [um]");
        cmd->add_option("--D_um2_per_s,--D", cfg.params.D, "diffusion coefficient [um^2/s]");
        cmd->add_option("--lambda_per_um3,--lambda", cfg.params.lambda, "receiver density [1/um^3]");
        cmd->add_option("--mu_per_s,--mu", cfg.params.mu, "degradation rate [1/s]");
        cmd->add_option("--dt_s,--dt", cfg.simcfg.dt, "simulation step [s]");
        cmd->add_option("--t_end_s,--t-end", cfg.simcfg.t_end, "simulation horizon [s]");
        cmd->add_option("--particles", cfg.simcfg.n_particles,
                        "particle count (replications for EDP runs)");
        cmd->add_option("--domain_multiplier", cfg.simcfg.domain_multiplier,
                        "truncation radius multiplier");
        cmd->add_option("--seed", cfg.simcfg.seed, "RNG seed");
        cmd->add_option("--absorption_mode", absorption, "endpoint | segment");
        cmd->add_option("--fresh_field_per_particle", cfg.simcfg.fresh_field_per_particle,
                        "redraw the receiver field per particle");
        cmd->add_option("--workers", cfg.simcfg.n_workers, "worker threads (0 = hardware)");
        cmd->add_option("--n_molecules,-N", cfg.detect.n_molecules, "emitted molecule count");
        cmd->add_option("--threshold", cfg.detect.threshold, "detection threshold eta");
        cmd->add_option("--detect_t_s", cfg.detect.t, "detection horizon [s]");
        cmd->add_option("--target_p", target_p, "target detection probability")
            ->each([&](const std::string&) { target_set = true; });
        cmd->add_option("--sweep-var", cfg.sweep.variable, "sweep variable: t lambda a mu N");
        cmd->add_option("--sweep-min", cfg.sweep.min, "sweep start");
        cmd->add_option("--sweep-max", cfg.sweep.max, "sweep end");
        cmd->add_option("--points,--sweep-points", cfg.sweep.points, "sweep point count");
        cmd->add_option("--sweep-scale", sweep_scale, "log | linear");
        cmd->add_option("--out", cfg.output_path, "output CSV path");
        cmd->add_option("--max-abs-error", cfg.max_abs_error, "compare gate on |analytic - mc|");
        cmd->add_option("--min-inside-ci", cfg.min_inside_ci, "compare gate on CI coverage");
    };

    CLI::App* analytic = app.add_subcommand("analytic", "evaluate closed-form quantities");
    add_common(analytic);
    analytic->add_option("--quantity", cfg.quantity, "quantity name (see README)");
    analytic->add_option("--t", t_point, "evaluation time [s] (shorthand for a 1-point sweep)")
        ->each([&](const std::string&) { t_point_set = true; });

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo hitting-probability run");
    add_common(simulate);

    CLI::App* compare = app.add_subcommand("compare", "analytic vs Monte Carlo with gates");
    add_common(compare);

    CLI::App* figure = app.add_subcommand("figure", "reproduce a figure dataset");
    figure->add_option("name", figure_name, "fig3 | fig4 | fig5 | fig6")->required();
    add_common(figure);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 2;
    }

    try {
        if (analytic->parsed()) cfg.mode = Mode::analytic;
        else if (simulate->parsed()) cfg.mode = Mode::simulate;
        else if (compare->parsed()) cfg.mode = Mode::compare;
        else cfg.mode = Mode::figure;

        cfg.figure = figure_name;
        if (target_set) cfg.detect.target_p = target_p;
        if (absorption == "segment") {
            cfg.simcfg.absorption_mode = mcvd::sim::AbsorptionMode::segment;
        } else if (absorption == "endpoint") {
            cfg.simcfg.absorption_mode = mcvd::sim::AbsorptionMode::endpoint;
        } else {
            throw std::invalid_argument("absorption_mode must be endpoint or segment");
        }
        if (sweep_scale == "log") cfg.sweep.log_scale = true;
        else if (sweep_scale == "linear") cfg.sweep.log_scale = false;
        else throw std::invalid_argument("sweep-scale must be log or linear");
        if (cfg.mode == Mode::analytic && t_point_set) {
            cfg.sweep = {"t", t_point, t_point, 1, false};
        }
        return mcvd::harness::run(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
