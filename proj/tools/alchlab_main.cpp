#include <CLI11.hpp>

#include "alch/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for boundaries at infinity of asymptotically "
                 "complex hyperbolic geometries"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------
    std::string scenario_path, out_dir = "out";
    int jobs = 1;
    double seed_override = -1.0, rmax_override = -1.0, tol_override = -1.0;

    auto* run = app.add_subcommand("run", "run one scenario and verify it");
    run->add_option("--scenario", scenario_path, "scenario TOML file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "worker threads");
    run->add_option("--seed-override", seed_override, "replace the scenario seed");
    run->add_option("--r-max-override", rmax_override, "replace the integration range");
    run->add_option("--tol-override", tol_override, "replace the integration tolerance");

    // identities ------------------------------------------------------
    int id_n = 1, id_trials = 1000;
    std::uint64_t id_seed = 1;
    auto* ident = app.add_subcommand("identities",
                                     "randomized machine-precision curvature identities");
    ident->add_option("--n", id_n, "complex dimension parameter");
    ident->add_option("--trials", id_trials, "number of random trials");
    ident->add_option("--seed", id_seed, "random seed");

    // sweep -------------------------------------------------------------
    std::string sweep_param;
    std::vector<double> sweep_values;
    std::string sweep_scenario, sweep_out = "out";
    int sweep_jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "re-run a scenario over parameter values");
    sweep->add_option("--scenario", sweep_scenario, "scenario TOML file")->required();
    sweep->add_option("--param", sweep_param, "parameter to vary: a or r_max")->required();
    sweep->add_option("--values", sweep_values, "parameter values")->expected(-1);
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--jobs", sweep_jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        alch::RunOverrides ov;
        if (seed_override >= 0.0) ov.seed = static_cast<std::uint64_t>(seed_override);
        if (rmax_override > 0.0) ov.r_max = rmax_override;
        if (tol_override > 0.0) ov.tol = tol_override;
        return alch::cmd_run(scenario_path, out_dir, jobs, ov);
    }
    if (ident->parsed()) return alch::cmd_identities(id_n, id_trials, id_seed);
    if (sweep->parsed())
        return alch::cmd_sweep(sweep_scenario, sweep_param, sweep_values, sweep_out,
                               sweep_jobs);
    return alch::kConfigError;
}
