#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmblock/cli/run_config.hpp"
#include "mmblock/model.hpp"
#include "mmblock/planner.hpp"
#include "mmblock/simulator.hpp"

namespace mmblock::cli {

using nlohmann::json;

inline std::string fmt(double v)
{
    if (std::isnan(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// CSV helper: joins cells with commas and terminates the row.
inline void write_row(std::ostream& os, std::vector<std::string> const& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i)
        os << (i ? "," : "") << cells[i];
    os << '\n';
}

inline std::filesystem::path resolve(RunConfig const& cfg,
                                     std::string const& name)
{
    std::filesystem::path p(name);
    if (p.is_relative())
        p = std::filesystem::path(cfg.output_dir) / p;
    return p;
}

inline std::ofstream open_output(std::filesystem::path const& path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open " + path.string());
    return os;
}

/// Sends `content` to the configured output file, or to `out` if none.
inline void emit(RunConfig const& cfg, std::ostream& out,
                 std::string const& content)
{
    if (cfg.output.empty())
    {
        out << content;
        return;
    }
    auto os = open_output(resolve(cfg, cfg.output));
    os << content;
}

inline json scene_json(UserScene const& u)
{
    return {{"radius_m", u.radius_m},
            {"bs_height_m", u.bs_height_m},
            {"ue_height_m", u.ue_height_m},
            {"blocker_height_m", u.blocker_height_m},
            {"bs_density_km2", u.bs_density_km2},
            {"blocker_density_m2", u.blocker_density_m2},
            {"speed_mps", u.speed_mps},
            {"mu_per_s", u.mu_per_s},
            {"omega_deg", u.omega_deg}};
}

//---------------------------------------------------------------------------//
// analyze / sweep
//---------------------------------------------------------------------------//

struct AnalysisRow
{
    UserScene scene;
    BlockageStats stats;
};

inline std::vector<std::string> const& analysis_columns()
{
    static std::vector<std::string> const cols{
        "bs_density_km2",
        "blocker_density_m2",
        "omega_deg",
        "bs_height_m",
        "speed_mps",
        "mu_per_s",
        "coverage_prob",
        "blockage_prob_marginal",
        "blockage_prob_conditional",
        "expected_freq_conditional_per_s",
        "expected_duration_conditional_s"};
    return cols;
}

inline std::vector<AnalysisRow> analysis_rows(RunConfig const& cfg)
{
    std::vector<UserScene> scenes;
    if (cfg.sweep)
    {
        validate(*cfg.sweep);
        for (double v : cfg.sweep->values())
            scenes.push_back(with_axis(cfg.scene, cfg.sweep->axis, v));
    }
    else
    {
        scenes.push_back(cfg.scene);
    }
    std::vector<AnalysisRow> rows;
    for (auto const& u : scenes)
        rows.push_back({u, analyze(to_si(u))});
    return rows;
}

inline std::string render_analysis(std::vector<AnalysisRow> const& rows,
                                   Format format)
{
    std::ostringstream os;
    if (format == Format::json)
    {
        json arr = json::array();
        for (auto const& r : rows)
        {
            json j = scene_json(r.scene);
            j["coverage_prob"] = r.stats.coverage_prob;
            j["blockage_prob_marginal"] = r.stats.blockage_prob_marginal;
            j["blockage_prob_conditional"] = r.stats.blockage_prob_conditional;
            j["expected_freq_conditional_per_s"]
                = r.stats.expected_freq_conditional;
            j["expected_duration_conditional_s"]
                = r.stats.expected_duration_conditional;
            arr.push_back(std::move(j));
        }
        os << arr.dump(2) << '\n';
        return os.str();
    }
    write_row(os, analysis_columns());
    for (auto const& r : rows)
    {
        auto const& u = r.scene;
        auto const& s = r.stats;
        write_row(os, {fmt(u.bs_density_km2), fmt(u.blocker_density_m2),
                       fmt(u.omega_deg), fmt(u.bs_height_m), fmt(u.speed_mps),
                       fmt(u.mu_per_s), fmt(s.coverage_prob),
                       fmt(s.blockage_prob_marginal),
                       fmt(s.blockage_prob_conditional),
                       fmt(s.expected_freq_conditional),
                       fmt(s.expected_duration_conditional)});
    }
    return os.str();
}

inline void run_analyze(RunConfig const& cfg, std::ostream& out)
{
    emit(cfg, out, render_analysis(analysis_rows(cfg), cfg.format));
}

inline void run_sweep(RunConfig const& cfg, std::ostream& out)
{
    if (!cfg.sweep)
        throw ParameterError("sweep-axis", "sweep needs an axis and range");
    run_analyze(cfg, out);
}

//---------------------------------------------------------------------------//
// simulate
//---------------------------------------------------------------------------//

inline std::string render_trials_csv(std::vector<sim::SimTrialResult> const& trials)
{
    std::ostringstream os;
    write_row(os, {"trial", "had_coverage", "blocked_fraction",
                   "transition_rate_per_s", "mean_blocked_interval_s",
                   "num_intervals"});
    for (auto const& t : trials)
        write_row(os, {std::to_string(t.trial), t.had_coverage ? "1" : "0",
                       fmt(t.blocked_fraction), fmt(t.transition_rate),
                       fmt(t.mean_blocked_interval),
                       std::to_string(t.num_intervals)});
    return os.str();
}

inline json estimate_json(sim::Estimate const& e, double analytic)
{
    json j{{"mean", e.mean},
           {"ci95_low", e.lower()},
           {"ci95_high", e.upper()},
           {"samples", e.samples},
           {"analytic", analytic}};
    j["ratio_to_analytic"] = analytic > 0 ? json(e.mean / analytic) : json();
    return j;
}

inline json simulation_summary(RunConfig const& cfg,
                               std::vector<sim::SimTrialResult> const& trials)
{
    sim::PooledStats pooled;
    try
    {
        pooled = sim::aggregate(trials);
    }
    catch (UndefinedQuantity const& e)
    {
        throw std::runtime_error(std::string("zero-coverage campaign: ")
                                 + e.what());
    }
    auto const scene = to_si(cfg.scene);
    json j;
    j["scene"] = scene_json(cfg.scene);
    j["simulation"] = {{"trials", cfg.sim.trials},
                       {"duration_s", cfg.sim.duration_s},
                       {"warmup_s", cfg.sim.warmup_s},
                       {"time_step_s", cfg.sim.time_step_s},
                       {"arena_half_width_m", cfg.sim.arena_half_width_m},
                       {"blockage_mode", cfg.sim.mm_infinity
                                             ? "mm_infinity"
                                             : "alternating_renewal"},
                       {"seed", cfg.seed}};
    j["covered_trials"] = pooled.covered_trials;
    j["coverage_fraction"] = pooled.coverage_fraction;
    j["coverage_prob_analytic"] = coverage_probability(scene);
    j["blocked_fraction"] = estimate_json(
        pooled.blocked_fraction, blockage_probability_conditional(scene));
    j["transition_rate_per_s"] = estimate_json(
        pooled.transition_rate, expected_frequency_conditional(scene));
    j["mean_blocked_interval_s"] = estimate_json(
        pooled.mean_interval, expected_duration_conditional(scene));
    return j;
}

/// Writes sim_trials.csv and sim_summary.json to the output directory and
/// prints the summary to `out`.
inline void run_simulate(RunConfig const& cfg, std::ostream& out)
{
    auto const config = to_sim_config(cfg.scene, cfg.sim, cfg.seed);
    sim::validate(config);
    auto const trials = sim::run_campaign(config, cfg.sim.threads);
    auto const summary = simulation_summary(cfg, trials);

    auto const trials_path = cfg.output.empty() ? resolve(cfg, "sim_trials.csv")
                                                : resolve(cfg, cfg.output);
    open_output(trials_path) << render_trials_csv(trials);
    open_output(resolve(cfg, "sim_summary.json")) << summary.dump(2) << '\n';
    out << summary.dump(2) << '\n';
}

//---------------------------------------------------------------------------//
// plan
//---------------------------------------------------------------------------//

inline plan::QoSTarget to_target(PlanOptions const& o)
{
    plan::QoSTarget t;
    t.max_blockage_prob = o.max_blockage_prob;
    t.max_frequency = o.max_frequency_per_s;
    t.max_duration = o.max_duration_s;
    t.form = o.marginal ? plan::ProbabilityForm::marginal
                        : plan::ProbabilityForm::conditional;
    return t;
}

inline json plan_json(RunConfig const& cfg)
{
    auto const scene = to_si(cfg.scene);
    auto const target = plan::validate(to_target(cfg.plan));
    auto const closed = plan::min_density_closed_form(target, scene);
    auto const exact = plan::min_density_exact(target, scene);

    json j;
    j["scene"] = scene_json(cfg.scene);
    json t{{"max_blockage_prob", target.max_blockage_prob},
           {"probability_form", target.form == plan::ProbabilityForm::marginal
                                    ? "marginal"
                                    : "conditional"}};
    t["max_frequency_per_s"] = target.max_frequency ? json(*target.max_frequency) : json();
    t["max_duration_s"] = target.max_duration ? json(*target.max_duration) : json();
    j["target"] = t;
    j["closed_form"] = {
        {"method", plan::to_string(closed.method)},
        {"min_bs_density_km2", closed.min_lambda_T / per_km2},
        {"approx_bs_density_km2", *closed.approx_lambda_T / per_km2}};
    j["exact"] = {{"method", plan::to_string(exact.method)},
                  {"binding_constraint",
                   plan::to_string(exact.binding_constraint)},
                  {"min_bs_density_km2", exact.min_lambda_T / per_km2}};
    if (exact.min_lambda_T > 0.0)
    {
        auto s = scene;
        s.bs_density = exact.min_lambda_T;
        auto const cache = plan::cache_requirement(s);
        j["at_exact_density"]
            = {{"blockage_prob_conditional", blockage_probability_conditional(s)},
               {"expected_freq_conditional_per_s",
                expected_frequency_conditional(s)},
               {"cache_duration_s", cache.duration},
               {"mean_time_between_blockages_s",
                std::isfinite(cache.mean_time_between_blockages)
                    ? json(cache.mean_time_between_blockages)
                    : json()}};
    }
    if (!cfg.plan.heights_m.empty())
    {
        json curve = json::array();
        for (auto const& p :
             plan::height_density_curve(target, scene, cfg.plan.heights_m))
            curve.push_back({{"bs_height_m", p.bs_height},
                             {"min_bs_density_km2", p.min_lambda_T / per_km2}});
        j["height_density_curve"] = curve;
    }
    return j;
}

inline void run_plan(RunConfig const& cfg, std::ostream& out)
{
    emit(cfg, out, plan_json(cfg).dump(2) + "\n");
}

//---------------------------------------------------------------------------//
// figures
//---------------------------------------------------------------------------//

struct FigureSeries
{
    double blocker_density_m2;
    double omega_deg;

    std::string suffix() const
    {
        return "lb" + fmt(blocker_density_m2) + "_w" + fmt(omega_deg) + "deg";
    }
};

inline std::vector<FigureSeries> const& figure_series()
{
    static std::vector<FigureSeries> const s{
        {0.01, 0.0}, {0.01, 60.0}, {0.1, 0.0}, {0.1, 60.0}};
    return s;
}

/// BS densities of figures 2-4: 10, 20, ..., 1000 per km^2.
inline std::vector<double> figure_densities_km2()
{
    std::vector<double> v;
    for (int d = 10; d <= 1000; d += 10)
        v.push_back(d);
    return v;
}

/// BS heights of figure 5: 2.0, 2.5, ..., 10.0 m.
inline std::vector<double> figure_heights_m()
{
    std::vector<double> v;
    for (int i = 0; i <= 16; ++i)
        v.push_back(2.0 + 0.5 * i);
    return v;
}

inline bool figure_sim_row(double density_km2)
{
    return std::fmod(density_km2, 100.0) == 0.0;
}

/// Writes fig2.csv .. fig5.csv into the output directory. Returns the paths.
inline std::vector<std::filesystem::path> run_figures(RunConfig const& cfg)
{
    auto const densities = figure_densities_km2();
    auto const& series = figure_series();

    struct Metric
    {
        char const* file;
        char const* prefix;
        double (*eval)(SceneParams const&);
    };
    Metric const metrics[] = {
        {"fig2.csv", "pbc", &blockage_probability_conditional},
        {"fig3.csv", "freq_per_s", &expected_frequency_conditional},
        {"fig4.csv", "duration_s", &expected_duration_conditional}};

    // pooled simulation per (series, density) on the coarse grid
    std::vector<std::vector<sim::PooledStats>> pooled(series.size());
    if (cfg.figures_with_sim)
    {
        for (std::size_t s = 0; s < series.size(); ++s)
            for (double d : densities)
            {
                if (!figure_sim_row(d))
                    continue;
                UserScene u = cfg.scene;
                u.blocker_density_m2 = series[s].blocker_density_m2;
                u.omega_deg = series[s].omega_deg;
                u.bs_density_km2 = d;
                auto const c = to_sim_config(u, cfg.sim, cfg.seed);
                pooled[s].push_back(
                    sim::aggregate(sim::run_campaign(c, cfg.sim.threads)));
            }
    }

    std::vector<std::filesystem::path> written;
    for (std::size_t m = 0; m < 3; ++m)
    {
        auto const& metric = metrics[m];
        std::vector<std::string> header{"bs_density_km2"};
        for (auto const& s : series)
            header.push_back(std::string(metric.prefix) + "_" + s.suffix());
        if (cfg.figures_with_sim)
            for (auto const& s : series)
            {
                header.push_back("sim_" + std::string(metric.prefix) + "_"
                                 + s.suffix());
                header.push_back("sim_" + std::string(metric.prefix) + "_"
                                 + s.suffix() + "_ci95");
            }
        std::ostringstream os;
        write_row(os, header);
        std::size_t sim_row = 0;
        for (double d : densities)
        {
            std::vector<std::string> row{fmt(d)};
            for (auto const& s : series)
            {
                UserScene u = cfg.scene;
                u.blocker_density_m2 = s.blocker_density_m2;
                u.omega_deg = s.omega_deg;
                u.bs_density_km2 = d;
                row.push_back(fmt(metric.eval(to_si(u))));
            }
            if (cfg.figures_with_sim)
            {
                bool const has = figure_sim_row(d);
                for (std::size_t s = 0; s < series.size(); ++s)
                {
                    if (!has)
                    {
                        row.insert(row.end(), {"", ""});
                        continue;
                    }
                    auto const& p = pooled[s][sim_row];
                    auto const& e = m == 0   ? p.blocked_fraction
                                    : m == 1 ? p.transition_rate
                                             : p.mean_interval;
                    row.push_back(fmt(e.mean));
                    row.push_back(fmt(e.half_width));
                }
                if (has)
                    ++sim_row;
            }
            write_row(os, row);
        }
        auto path = resolve(cfg, metric.file);
        open_output(path) << os.str();
        written.push_back(path);
    }

    // height/density trade-off at the configured probability target
    plan::QoSTarget target;
    target.max_blockage_prob = cfg.plan.max_blockage_prob;
    std::vector<std::string> header{"bs_height_m"};
    for (auto const& s : series)
        header.push_back("min_bs_density_km2_" + s.suffix());
    std::vector<std::vector<plan::HeightPoint>> curves;
    for (auto const& s : series)
    {
        UserScene u = cfg.scene;
        u.blocker_density_m2 = s.blocker_density_m2;
        u.omega_deg = s.omega_deg;
        curves.push_back(
            plan::height_density_curve(target, to_si(u), figure_heights_m()));
    }
    std::ostringstream os;
    write_row(os, header);
    auto const heights = figure_heights_m();
    for (std::size_t i = 0; i < heights.size(); ++i)
    {
        std::vector<std::string> row{fmt(heights[i])};
        for (auto const& c : curves)
            row.push_back(fmt(c[i].min_lambda_T / per_km2));
        write_row(os, row);
    }
    auto path = resolve(cfg, "fig5.csv");
    open_output(path) << os.str();
    written.push_back(path);
    return written;
}

} // namespace mmblock::cli
