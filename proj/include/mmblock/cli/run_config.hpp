#pragma once

// User-facing configuration. Scene values are held in the units the CLI
// accepts (BS density per km^2, omega in degrees) and converted to SI at
// this boundary.

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mmblock/errors.hpp"
#include "mmblock/scene.hpp"
#include "mmblock/simulator.hpp"

namespace mmblock::cli {

enum class Command
{
    analyze,
    simulate,
    plan,
    sweep,
    figures,
};

enum class Format
{
    csv,
    json,
};

inline constexpr double per_km2 = 1e-6; // 1 / km^2 in 1 / m^2

/// Scene parameters in user units.
struct UserScene
{
    double radius_m = 100.0;
    double bs_height_m = 5.0;
    double ue_height_m = 1.4;
    double blocker_height_m = 1.8;
    double bs_density_km2 = 200.0;
    double blocker_density_m2 = 0.1;
    double speed_mps = 1.0;
    double mu_per_s = 2.0;
    double omega_deg = 60.0;
};

inline SceneParams to_si(UserScene const& u)
{
    SceneParams s;
    s.radius = u.radius_m;
    s.bs_height = u.bs_height_m;
    s.ue_height = u.ue_height_m;
    s.blocker_height = u.blocker_height_m;
    s.bs_density = u.bs_density_km2 * per_km2;
    s.blocker_density = u.blocker_density_m2;
    s.blocker_speed = u.speed_mps;
    s.mu = u.mu_per_s;
    s.omega = u.omega_deg * std::numbers::pi / 180.0;
    return s;
}

inline UserScene from_si(SceneParams const& s)
{
    UserScene u;
    u.radius_m = s.radius;
    u.bs_height_m = s.bs_height;
    u.ue_height_m = s.ue_height;
    u.blocker_height_m = s.blocker_height;
    u.bs_density_km2 = s.bs_density / per_km2;
    u.blocker_density_m2 = s.blocker_density;
    u.speed_mps = s.blocker_speed;
    u.mu_per_s = s.mu;
    u.omega_deg = s.omega * 180.0 / std::numbers::pi;
    return u;
}

/// Axes a sweep can run over, named after their CLI flags.
inline std::vector<std::string> const& sweep_axes()
{
    static std::vector<std::string> const axes{
        "bs-density-km2", "blocker-density-m2", "omega-deg",
        "bs-height-m",    "speed-mps",          "mu"};
    return axes;
}

struct SweepSpec
{
    std::string axis = "bs-density-km2";
    double from = 10.0;
    double to = 500.0;
    int steps = 50;

    /// `steps` evenly spaced values from `from` to `to` inclusive.
    std::vector<double> values() const
    {
        std::vector<double> v;
        if (steps == 1)
            return {from};
        for (int i = 0; i < steps; ++i)
            v.push_back(from + (to - from) * i / (steps - 1));
        return v;
    }
};

inline void validate(SweepSpec const& sweep)
{
    bool known = false;
    for (auto const& a : sweep_axes())
        known = known || a == sweep.axis;
    if (!known)
        throw ParameterError("sweep-axis", "unknown axis '" + sweep.axis + "'");
    if (sweep.steps < 1)
        throw ParameterError("sweep-steps", "must be at least 1");
    if (sweep.steps > 1 && !(sweep.to > sweep.from))
        throw ParameterError("sweep-to", "range must be non-empty and "
                                         "increasing");
}

inline UserScene with_axis(UserScene u, std::string const& axis, double value)
{
    if (axis == "bs-density-km2")
        u.bs_density_km2 = value;
    else if (axis == "blocker-density-m2")
        u.blocker_density_m2 = value;
    else if (axis == "omega-deg")
        u.omega_deg = value;
    else if (axis == "bs-height-m")
        u.bs_height_m = value;
    else if (axis == "speed-mps")
        u.speed_mps = value;
    else if (axis == "mu")
        u.mu_per_s = value;
    else
        throw ParameterError("sweep-axis", "unknown axis '" + axis + "'");
    return u;
}

struct SimOptions
{
    int trials = 20;
    double duration_s = 1000.0;
    double warmup_s = 60.0;
    double time_step_s = 0.1;
    double arena_half_width_m = 100.0;
    unsigned threads = 1;
    bool mm_infinity = false;
};

inline sim::SimConfig to_sim_config(UserScene const& u, SimOptions const& o,
                                    std::uint64_t seed)
{
    sim::SimConfig c;
    c.scene = to_si(u);
    c.num_trials = o.trials;
    c.sim_duration = o.duration_s;
    c.warmup = o.warmup_s;
    c.time_step = o.time_step_s;
    c.arena_half_width = o.arena_half_width_m;
    c.rng_seed = seed;
    c.mode = o.mm_infinity ? sim::BlockageMode::mm_infinity
                           : sim::BlockageMode::alternating_renewal;
    return c;
}

struct PlanOptions
{
    double max_blockage_prob = 1e-5;
    std::optional<double> max_frequency_per_s;
    std::optional<double> max_duration_s;
    bool marginal = false;
    std::vector<double> heights_m;
};

struct RunConfig
{
    Command command = Command::analyze;
    UserScene scene;
    std::optional<SweepSpec> sweep;
    std::string output; ///< file path; empty means stdout
    std::string output_dir = ".";
    Format format = Format::csv;
    std::uint64_t seed = 1;
    SimOptions sim;
    PlanOptions plan;
    bool figures_with_sim = false;
};

} // namespace mmblock::cli
