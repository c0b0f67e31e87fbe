// mmblock: closed-form blockage analysis, simulation campaigns, figure data
// and network-planning queries from the command line.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "mmblock/cli/commands.hpp"

namespace {

using namespace mmblock::cli;

void add_scene_options(CLI::App& app, UserScene& s)
{
    auto* g = "Scene";
    app.add_option("--radius-m", s.radius_m, "Serving disc radius R (m)")
        ->capture_default_str()->group(g);
    app.add_option("--bs-height-m", s.bs_height_m, "BS height h_T (m)")
        ->capture_default_str()->group(g);
    app.add_option("--ue-height-m", s.ue_height_m, "UE height h_R (m)")
        ->capture_default_str()->group(g);
    app.add_option("--blocker-height-m", s.blocker_height_m,
                   "Blocker height h_B (m)")
        ->capture_default_str()->group(g);
    app.add_option("--bs-density-km2", s.bs_density_km2,
                   "BS density (per km^2)")
        ->capture_default_str()->group(g);
    app.add_option("--blocker-density-m2", s.blocker_density_m2,
                   "Blocker density (per m^2)")
        ->capture_default_str()->group(g);
    app.add_option("--speed-mps", s.speed_mps, "Blocker speed V (m/s)")
        ->capture_default_str()->group(g);
    app.add_option("--mu", s.mu_per_s,
                   "Unblocking rate (1/s); 1/mu is the mean single-blocker "
                   "blockage duration")
        ->capture_default_str()->group(g);
    app.add_option("--omega-deg", s.omega_deg, "Self-blockage angle (degrees)")
        ->capture_default_str()->group(g);
}

void add_sweep_options(CLI::App& app, SweepSpec& sweep, bool& enabled,
                       bool required)
{
    auto* axis = app.add_option("--sweep-axis", sweep.axis,
                                "Parameter to sweep")
                     ->check(CLI::IsMember(sweep_axes()));
    if (required)
        axis->required();
    app.add_option("--sweep-from", sweep.from, "First sweep value")
        ->capture_default_str();
    app.add_option("--sweep-to", sweep.to, "Last sweep value")
        ->capture_default_str();
    app.add_option("--sweep-steps", sweep.steps, "Number of sweep points")
        ->capture_default_str();
    app.callback([&enabled, axis] { enabled = axis->count() > 0; });
}

void add_sim_options(CLI::App& app, SimOptions& o)
{
    app.add_option("--trials", o.trials, "Independent trials")
        ->capture_default_str();
    app.add_option("--duration-s", o.duration_s, "Simulated time per trial (s)")
        ->capture_default_str();
    app.add_option("--warmup-s", o.warmup_s, "Discarded warmup (s)")
        ->capture_default_str();
    app.add_option("--time-step-s", o.time_step_s, "Mobility time step (s)")
        ->capture_default_str();
    app.add_option("--arena-half-width-m", o.arena_half_width_m,
                   "Half side of the square blocker arena (m)")
        ->capture_default_str();
    app.add_option("--threads", o.threads, "Worker threads")
        ->capture_default_str();
    app.add_flag("--mm-infinity", o.mm_infinity,
                 "Each crossing adds its own Exp(mu) interval (M/M/inf link "
                 "blocking) instead of the on-off link model");
}

} // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    CLI::App app{"mmWave dynamic and self-blockage analysis"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Read options from a key=value file (subcommand options "
                   "under [analyze], [simulate], ...)");
    add_scene_options(app, cfg.scene);
    app.add_option("--output-dir", cfg.output_dir,
                   "Directory for output files")
        ->envname("MMBLOCK_OUTPUT_DIR")
        ->capture_default_str();
    app.add_option("-o,--output", cfg.output,
                   "Output file (relative to --output-dir); stdout if omitted");
    std::map<std::string, Format> const formats{{"csv", Format::csv},
                                                {"json", Format::json}};
    app.add_option("--format", cfg.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    app.add_option("--seed", cfg.seed, "Master RNG seed")->capture_default_str();

    SweepSpec sweep;
    bool analyze_sweep = false;
    bool sweep_sweep = false;

    auto* analyze = app.add_subcommand("analyze", "Closed-form statistics for "
                                                  "one scene or a sweep");
    analyze->fallthrough();
    add_sweep_options(*analyze, sweep, analyze_sweep, false);

    auto* sweep_cmd = app.add_subcommand("sweep", "Closed-form statistics "
                                                  "over a parameter range");
    sweep_cmd->fallthrough();
    add_sweep_options(*sweep_cmd, sweep, sweep_sweep, true);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo campaign "
                                                    "with analytic comparison");
    simulate->fallthrough();
    add_sim_options(*simulate, cfg.sim);

    auto* plan = app.add_subcommand("plan", "Minimum BS density for a QoS "
                                            "target");
    plan->fallthrough();
    plan->add_option("--max-blockage-prob", cfg.plan.max_blockage_prob,
                     "Blockage probability bound")
        ->capture_default_str();
    plan->add_option("--max-frequency", cfg.plan.max_frequency_per_s,
                     "Blockage frequency bound (per s)");
    plan->add_option("--max-duration", cfg.plan.max_duration_s,
                     "Expected blockage duration bound (s)");
    plan->add_flag("--marginal", cfg.plan.marginal,
                   "Bound P(B) instead of P(B|C)");
    plan->add_option("--heights", cfg.plan.heights_m,
                     "BS heights (m) for the height/density curve");

    auto* figures = app.add_subcommand("figures", "Write fig2.csv .. fig5.csv");
    figures->fallthrough();
    figures->add_flag("--with-sim", cfg.figures_with_sim,
                      "Add simulated columns with 95% CIs");
    figures->add_option("--max-blockage-prob", cfg.plan.max_blockage_prob,
                        "Probability target of the height/density curve")
        ->capture_default_str();
    add_sim_options(*figures, cfg.sim);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (analyze_sweep || sweep_sweep)
            cfg.sweep = sweep;
        if (*analyze)
            run_analyze(cfg, std::cout);
        else if (*sweep_cmd)
            run_sweep(cfg, std::cout);
        else if (*simulate)
            run_simulate(cfg, std::cout);
        else if (*plan)
            run_plan(cfg, std::cout);
        else if (*figures)
            for (auto const& p : run_figures(cfg))
                std::cout << p.string() << '\n';
    }
    catch (mmblock::ParameterError const& e)
    {
        std::cerr << "error: invalid " << e.what() << '\n';
        return 1;
    }
    catch (mmblock::UndefinedQuantity const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
