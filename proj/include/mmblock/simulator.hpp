#pragma once

// Monte-Carlo simulation of the deployment: PPP base stations in a disc
// around a fixed UE, point blockers on a reflected random-waypoint walk in a
// square arena, a random self-blockage sector, and per-link blocking driven
// by geometric crossings of the effective link segment.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "mmblock/errors.hpp"
#include "mmblock/geometry.hpp"
#include "mmblock/model.hpp"
#include "mmblock/rng.hpp"
#include "mmblock/scene.hpp"

namespace mmblock::sim {

/// How a crossing turns into link blockage.
enum class BlockageMode
{
    /// On-off link: a crossing of an unblocked link starts an Exp(mu)
    /// blocked period; crossings during a blocked period are absorbed.
    alternating_renewal,
    /// Each crossing adds its own Exp(mu) interval; the link is blocked
    /// while any interval is active (M/M/inf busy periods).
    mm_infinity,
};

struct SimConfig
{
    SceneParams scene;
    double arena_half_width = 100.0; ///< m; the arena is a square of side 2x this
    double sim_duration = 1000.0;    ///< s
    double warmup = 60.0;            ///< s discarded before statistics
    double time_step = 0.1;          ///< s
    int num_trials = 20;
    std::uint64_t rng_seed = 1;
    double max_leg_time = 60.0; ///< waypoint legs last Unif[0, max_leg_time] s
    BlockageMode mode = BlockageMode::alternating_renewal;
};

inline SimConfig const& validate(SimConfig const& config)
{
    using detail::fmt_value;
    using detail::require;
    mmblock::validate(config.scene);
    require(config.arena_half_width >= config.scene.radius,
            "arena_half_width",
            "must be at least R, got " + fmt_value(config.arena_half_width));
    require(config.warmup >= 0.0, "warmup", "must be non-negative");
    require(config.sim_duration > config.warmup, "sim_duration",
            "must exceed warmup");
    require(config.time_step > 0.0, "time_step", "must be positive");
    require(config.num_trials >= 1, "num_trials", "must be at least 1");
    require(config.max_leg_time > 0.0, "max_leg_time", "must be positive");
    return config;
}

struct Blocker
{
    Vec2 position;
    double heading = 0;            ///< radians in [0, 2 pi)
    double leg_time_remaining = 0; ///< s
};

struct Link
{
    Vec2 bs_position;
    double distance = 0;    ///< m
    double orientation = 0; ///< radians in [0, 2 pi)
    Vec2 effective_endpoint;
    bool self_blocked = false;
    std::vector<double> active_until; ///< expiry times of blockage intervals

    std::size_t dynamic_block_count() const noexcept
    {
        return active_until.size();
    }

    /// Time until which the link stays blocked; -inf if no interval is active.
    double blocked_until() const noexcept
    {
        double t = -std::numeric_limits<double>::infinity();
        for (double e : active_until)
            t = std::max(t, e);
        return t;
    }

    bool blocked_at(double t) const noexcept { return blocked_until() > t; }
};

struct Scene
{
    std::vector<Link> links;
    std::vector<Blocker> blockers;
    double sector_start = 0; ///< self-blockage sector is [start, start + omega)
};

namespace detail {
inline double wrap_angle(double a)
{
    a = std::fmod(a, two_pi);
    if (a < 0)
        a += two_pi;
    return a >= two_pi ? 0.0 : a;
}

inline bool in_sector(double angle, double start, double width)
{
    return width > 0.0 && wrap_angle(angle - start) < width;
}
} // namespace detail

/// Link towards a BS at `bs`, with the effective segment of the scene.
inline Link make_link(Vec2 bs, SceneParams const& scene)
{
    Link link;
    link.bs_position = bs;
    link.distance = norm(bs);
    link.orientation = detail::wrap_angle(std::atan2(bs.y, bs.x));
    link.effective_endpoint = effective_length_fraction(scene) * bs;
    return link;
}

/// Blocker count ~ Poisson(lambda_B * area), uniform positions and headings,
/// residual leg times uniform on [0, max_leg_time].
inline std::vector<Blocker> place_blockers(SimConfig const& config, Engine& rng)
{
    double const w = config.arena_half_width;
    double const mean = config.scene.blocker_density * 4.0 * w * w;
    std::vector<Blocker> blockers;
    if (mean <= 0.0)
        return blockers;
    auto const count = std::poisson_distribution<std::int64_t>(mean)(rng);
    blockers.reserve(static_cast<std::size_t>(count));
    std::uniform_real_distribution<double> coord(-w, w);
    for (std::int64_t i = 0; i < count; ++i)
    {
        Blocker b;
        b.position.x = coord(rng);
        b.position.y = coord(rng);
        b.heading = two_pi * uniform01(rng);
        b.leg_time_remaining = config.max_leg_time * uniform01(rng);
        blockers.push_back(b);
    }
    return blockers;
}

/// BS count ~ Poisson(lambda_T pi R^2), uniform in the disc; one uniformly
/// oriented self-blockage sector; uniform blockers in the arena.
inline Scene build_scene(SimConfig const& config, Engine& rng)
{
    validate(config);
    auto const& scene = config.scene;
    Scene out;
    double const mean_bs
        = scene.bs_density * std::numbers::pi * scene.radius * scene.radius;
    std::int64_t const count
        = mean_bs > 0.0
              ? std::poisson_distribution<std::int64_t>(mean_bs)(rng)
              : 0;
    out.links.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
    {
        double const r = scene.radius * std::sqrt(1.0 - uniform01(rng));
        double const theta = two_pi * uniform01(rng);
        out.links.push_back(
            make_link({r * std::cos(theta), r * std::sin(theta)}, scene));
    }
    out.sector_start = two_pi * uniform01(rng);
    for (auto& link : out.links)
        link.self_blocked
            = detail::in_sector(link.orientation, out.sector_start, scene.omega);
    out.blockers = place_blockers(config, rng);
    return out;
}

/// A straight piece of one blocker's path during a step.
struct PathPiece
{
    std::size_t blocker = 0;
    Vec2 from;
    Vec2 to;
    double t0 = 0;
    double t1 = 0;
};

struct Mobility
{
    double speed = 1.0;
    double half_width = 100.0;
    double max_leg_time = 60.0;

    static Mobility of(SimConfig const& config)
    {
        return {config.scene.blocker_speed, config.arena_half_width,
                config.max_leg_time};
    }
};

namespace detail {
/// Moves `b` for `duration` seconds along its heading, folding the path at
/// the arena walls. Appends one piece per straight run.
inline void walk(Blocker& b, std::size_t index, double t_start, double duration,
                 Mobility const& mob, std::vector<PathPiece>& out)
{
    double const w = mob.half_width;
    double dx = std::cos(b.heading);
    double dy = std::sin(b.heading);
    double remaining = mob.speed * duration;
    double t = t_start;
    Vec2 p = b.position;
    bool reflected = false;
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (int guard = 0; remaining > 0.0 && guard < 64; ++guard)
    {
        double tx = inf;
        double ty = inf;
        if (dx > 0)
            tx = (w - p.x) / dx;
        else if (dx < 0)
            tx = (-w - p.x) / dx;
        if (dy > 0)
            ty = (w - p.y) / dy;
        else if (dy < 0)
            ty = (-w - p.y) / dy;
        double const tw = std::max(0.0, std::min(tx, ty));

        if (tw >= remaining)
        {
            Vec2 const q{p.x + remaining * dx, p.y + remaining * dy};
            double const t_end = t + remaining / mob.speed;
            out.push_back({index, p, q, t, t_end});
            p = q;
            remaining = 0.0;
            break;
        }

        Vec2 q{p.x + tw * dx, p.y + tw * dy};
        if (tx <= tw)
            q.x = dx > 0 ? w : -w;
        if (ty <= tw)
            q.y = dy > 0 ? w : -w;
        double const t_wall = t + tw / mob.speed;
        if (tw > 0.0)
            out.push_back({index, p, q, t, t_wall});
        if (tx <= tw)
            dx = -dx;
        if (ty <= tw)
            dy = -dy;
        reflected = true;
        p = q;
        t = t_wall;
        remaining -= tw;
    }
    b.position = {std::clamp(p.x, -w, w), std::clamp(p.y, -w, w)};
    if (reflected)
        b.heading = wrap_angle(std::atan2(dy, dx));
}
} // namespace detail

/// Advances every blocker by `dt` starting at time `t_start` and appends the
/// traversed path pieces to `out`. Legs that expire inside the step draw a
/// fresh heading ~ Unif[0, 2 pi) and duration ~ Unif[0, max_leg_time].
inline void advance_blockers(std::span<Blocker> blockers, double t_start,
                             double dt, Mobility const& mob, Engine& rng,
                             std::vector<PathPiece>& out)
{
    for (std::size_t i = 0; i < blockers.size(); ++i)
    {
        Blocker& b = blockers[i];
        double left = dt;
        double t = t_start;
        while (left > 0.0)
        {
            double const run = std::min(left, b.leg_time_remaining);
            if (run > 0.0 && mob.speed > 0.0)
                detail::walk(b, i, t, run, mob, out);
            t += run;
            left -= run;
            b.leg_time_remaining -= run;
            if (b.leg_time_remaining <= 0.0)
            {
                b.heading = two_pi * uniform01(rng);
                b.leg_time_remaining = mob.max_leg_time * uniform01(rng);
            }
        }
    }
}

inline std::vector<PathPiece> advance_blockers(std::vector<Blocker>& blockers,
                                               double t_start, double dt,
                                               Mobility const& mob, Engine& rng)
{
    std::vector<PathPiece> out;
    advance_blockers(blockers, t_start, dt, mob, rng, out);
    return out;
}

struct Crossing
{
    std::size_t link = 0;
    double time = 0;
    std::size_t blocker = 0;
};

/// Every intersection of a path piece with the UE-to-effective-endpoint
/// segment of a link outside the self-blockage sector. Sorted by time, then
/// link, then blocker.
inline void detect_crossings(std::span<PathPiece const> pieces,
                             std::span<Link const> links,
                             std::vector<Crossing>& out)
{
    double reach = 0.0;
    for (auto const& link : links)
        if (!link.self_blocked)
            reach = std::max({reach, std::fabs(link.effective_endpoint.x),
                              std::fabs(link.effective_endpoint.y)});
    Vec2 const origin{0.0, 0.0};
    std::size_t const first = out.size();
    for (auto const& piece : pieces)
    {
        if (std::min(piece.from.x, piece.to.x) > reach
            || std::max(piece.from.x, piece.to.x) < -reach
            || std::min(piece.from.y, piece.to.y) > reach
            || std::max(piece.from.y, piece.to.y) < -reach)
            continue;
        for (std::size_t l = 0; l < links.size(); ++l)
        {
            if (links[l].self_blocked)
                continue;
            if (auto hit = intersect(piece.from, piece.to, origin,
                                     links[l].effective_endpoint))
            {
                double const t = piece.t0 + hit->s * (piece.t1 - piece.t0);
                out.push_back({l, t, piece.blocker});
            }
        }
    }
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](Crossing const& a, Crossing const& b) {
                  if (a.time != b.time)
                      return a.time < b.time;
                  if (a.link != b.link)
                      return a.link < b.link;
                  return a.blocker < b.blocker;
              });
}

inline std::vector<Crossing> detect_crossings(std::span<PathPiece const> pieces,
                                              std::span<Link const> links)
{
    std::vector<Crossing> out;
    detect_crossings(pieces, links, out);
    return out;
}

/// Applies one crossing at time `t`. Returns true if a blockage interval was
/// added.
inline bool apply_crossing(Link& link, double t, double mu, BlockageMode mode,
                           Engine& rng)
{
    if (mode == BlockageMode::alternating_renewal && link.blocked_at(t))
        return false;
    link.active_until.push_back(t + std::exponential_distribution<double>(mu)(rng));
    return true;
}

/// Drops intervals that ended strictly before `now`.
inline void expire(Link& link, double now)
{
    std::erase_if(link.active_until, [now](double e) { return e < now; });
}

/// Applies time-ordered crossings, then drops intervals expired by `now`.
inline void update_link_states(std::span<Link> links,
                               std::span<Crossing const> crossings, double now,
                               double mu, BlockageMode mode, Engine& rng)
{
    for (auto const& c : crossings)
        apply_crossing(links[c.link], c.time, mu, mode, rng);
    for (auto& link : links)
        expire(link, now);
}

struct SimTrialResult
{
    std::size_t trial = 0;
    bool had_coverage = false;   ///< at least one link outside the sector
    double blocked_fraction = 0; ///< time fraction in the all-blocked state
    double transition_rate = 0;  ///< entries into the all-blocked state per s
    double mean_blocked_interval = 0; ///< s; 0 when no interval was entered
    std::int64_t num_intervals = 0;
    std::size_t num_links = 0; ///< links outside the self-blockage sector
    double blocked_time = 0;   ///< s, after warmup
};

namespace detail {
/// Tracks the all-blocked state, which holds at time t iff t < m where m is
/// the smallest blocked_until over the unobstructed links.
class AllBlockedTracker
{
  public:
    AllBlockedTracker(double warmup, double end) : warmup_(warmup), end_(end) {}

    /// Lets time flow to `t` with no crossing in between.
    void advance_to(double t, double m)
    {
        if (in_state_ && m < t)
            close(m);
    }

    /// State after a crossing at `t` changed m.
    void after_crossing(double t, double m)
    {
        if (!in_state_ && m > t)
            open(t);
        else if (in_state_ && m <= t)
            close(t);
    }

    void finish(double m)
    {
        if (in_state_)
            close(std::min(m, end_));
    }

    double blocked_time() const { return blocked_time_; }
    std::int64_t entries() const { return entries_; }
    double recorded_interval_time() const { return interval_time_; }

  private:
    void open(double t)
    {
        in_state_ = true;
        entered_ = t;
        if (t >= warmup_)
            ++entries_;
    }

    void close(double t)
    {
        in_state_ = false;
        t = std::min(t, end_);
        blocked_time_ += std::max(0.0, t - std::max(entered_, warmup_));
        if (entered_ >= warmup_)
            interval_time_ += t - entered_;
    }

    double warmup_;
    double end_;
    bool in_state_ = false;
    double entered_ = 0;
    double blocked_time_ = 0;
    double interval_time_ = 0;
    std::int64_t entries_ = 0;
};

inline double min_blocked_until(std::span<Link const> links)
{
    double m = std::numeric_limits<double>::infinity();
    for (auto const& link : links)
        if (!link.self_blocked)
            m = std::min(m, link.blocked_until());
    return m;
}

inline std::int64_t step_count(SimConfig const& config)
{
    return static_cast<std::int64_t>(
        std::ceil(config.sim_duration / config.time_step - 1e-9));
}
} // namespace detail

/// Simulates one independent scene from 0 to sim_duration.
///
/// Intervals entered before the warmup ends contribute only their
/// post-warmup blocked time; intervals still open at the end are truncated.
inline SimTrialResult run_trial(SimConfig const& config,
                                std::uint64_t trial_seed)
{
    validate(config);
    Engine rng(trial_seed);
    Scene scene = build_scene(config, rng);

    SimTrialResult res;
    res.num_links = static_cast<std::size_t>(
        std::count_if(scene.links.begin(), scene.links.end(),
                      [](Link const& l) { return !l.self_blocked; }));
    res.had_coverage = res.num_links > 0;
    if (!res.had_coverage)
        return res;

    double const end = config.sim_duration;
    double const mu = config.scene.mu;
    detail::AllBlockedTracker tracker(config.warmup, end);
    auto const mob = Mobility::of(config);
    std::span<Link> links(scene.links);

    if (!scene.blockers.empty() && mob.speed > 0.0)
    {
        std::vector<PathPiece> pieces;
        std::vector<Crossing> crossings;
        pieces.reserve(scene.blockers.size() + 16);
        auto const steps = detail::step_count(config);
        for (std::int64_t k = 0; k < steps; ++k)
        {
            double const t0 = static_cast<double>(k) * config.time_step;
            double const t1
                = std::min(static_cast<double>(k + 1) * config.time_step, end);
            pieces.clear();
            crossings.clear();
            advance_blockers(scene.blockers, t0, t1 - t0, mob, rng, pieces);
            detect_crossings(pieces, links, crossings);
            for (auto const& c : crossings)
            {
                tracker.advance_to(c.time, detail::min_blocked_until(links));
                if (apply_crossing(links[c.link], c.time, mu, config.mode, rng))
                    tracker.after_crossing(c.time,
                                           detail::min_blocked_until(links));
            }
            tracker.advance_to(t1, detail::min_blocked_until(links));
            for (auto& link : links)
                expire(link, t1);
        }
    }
    tracker.finish(detail::min_blocked_until(links));

    double const window = end - config.warmup;
    res.blocked_time = tracker.blocked_time();
    res.blocked_fraction = std::clamp(res.blocked_time / window, 0.0, 1.0);
    res.num_intervals = tracker.entries();
    res.transition_rate = static_cast<double>(res.num_intervals) / window;
    if (res.num_intervals > 0)
        res.mean_blocked_interval = tracker.recorded_interval_time()
                                    / static_cast<double>(res.num_intervals);
    return res;
}

/// Runs config.num_trials trials, trial i seeded with
/// derive_seed(config.rng_seed, i). Results are ordered by trial index
/// regardless of `threads`.
inline std::vector<SimTrialResult> run_campaign(SimConfig const& config,
                                                unsigned threads = 1)
{
    validate(config);
    auto const n = static_cast<std::size_t>(config.num_trials);
    std::vector<SimTrialResult> results(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            results[i] = run_trial(config, derive_seed(config.rng_seed, i));
            results[i].trial = i;
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1)
    {
        worker();
        return results;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    pool.clear();
    return results;
}

/// Sample mean with a normal-approximation 95% half-width (NaN for fewer
/// than two samples).
struct Estimate
{
    double mean = 0;
    double half_width = std::numeric_limits<double>::quiet_NaN();
    std::size_t samples = 0;

    double lower() const { return mean - half_width; }
    double upper() const { return mean + half_width; }
};

inline Estimate estimate(std::span<double const> values)
{
    Estimate e;
    e.samples = values.size();
    if (values.empty())
    {
        e.mean = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double sum = 0;
    for (double v : values)
        sum += v;
    double const n = static_cast<double>(values.size());
    e.mean = sum / n;
    if (values.size() >= 2)
    {
        double ss = 0;
        for (double v : values)
            ss += (v - e.mean) * (v - e.mean);
        e.half_width = 1.959963984540054 * std::sqrt(ss / (n - 1) / n);
    }
    return e;
}

/// Coverage-conditioned pooled statistics across trials.
struct PooledStats
{
    std::size_t trials = 0;
    std::size_t covered_trials = 0;
    double coverage_fraction = 0;
    Estimate blocked_fraction;
    Estimate transition_rate;
    /// Mean over covered trials that entered the all-blocked state at least
    /// once of their per-trial mean interval.
    Estimate mean_interval;
};

inline PooledStats aggregate(std::span<SimTrialResult const> results)
{
    std::vector<SimTrialResult> sorted(results.begin(), results.end());
    std::sort(sorted.begin(), sorted.end(),
              [](auto const& a, auto const& b) { return a.trial < b.trial; });

    std::vector<double> fraction, rate, interval;
    for (auto const& r : sorted)
    {
        if (!r.had_coverage)
            continue;
        fraction.push_back(r.blocked_fraction);
        rate.push_back(r.transition_rate);
        if (r.num_intervals > 0)
            interval.push_back(r.mean_blocked_interval);
    }
    if (fraction.empty())
        throw UndefinedQuantity("no trial had coverage; conditional "
                                "statistics are undefined");
    PooledStats s;
    s.trials = sorted.size();
    s.covered_trials = fraction.size();
    s.coverage_fraction
        = static_cast<double>(s.covered_trials) / static_cast<double>(s.trials);
    s.blocked_fraction = estimate(fraction);
    s.transition_rate = estimate(rate);
    s.mean_interval = estimate(interval);
    return s;
}

/// Long-run statistics of a single fixed link under the blocker process.
struct LinkProbeResult
{
    std::int64_t crossings = 0; ///< after warmup
    double observed_time = 0;   ///< s
    double crossing_rate = 0;   ///< per s
    double blocked_fraction = 0;
    double blocked_fraction_se = 0; ///< batch-means standard error
};

/// Simulates blockers around one link of length `distance` at angle
/// `orientation`. The post-warmup window is split into `batches` equal
/// batches for the blocked-fraction standard error.
inline LinkProbeResult probe_link(SimConfig const& config, double distance,
                                  double orientation, std::uint64_t seed,
                                  int batches = 20)
{
    validate(config);
    if (!(distance > 0.0 && distance <= config.scene.radius))
        throw ParameterError("distance", "must lie in (0, R]");
    if (batches < 2)
        throw ParameterError("batches", "at least two batches required");

    Engine rng(seed);
    std::vector<Link> links{make_link(
        {distance * std::cos(orientation), distance * std::sin(orientation)},
        config.scene)};
    auto blockers = place_blockers(config, rng);
    auto const mob = Mobility::of(config);

    double const start = config.warmup;
    double const end = config.sim_duration;
    double const batch_len = (end - start) / batches;
    std::vector<double> batch_blocked(static_cast<std::size_t>(batches), 0.0);
    auto add_blocked = [&](double a, double b) {
        a = std::max(a, start);
        b = std::min(b, end);
        while (a < b)
        {
            auto const k = std::min<std::size_t>(
                static_cast<std::size_t>((a - start) / batch_len),
                batch_blocked.size() - 1);
            double const stop = std::min(b, start + batch_len * (k + 1));
            batch_blocked[k] += stop - a;
            a = stop;
        }
    };

    LinkProbeResult res;
    double busy_start = 0;
    double busy_end = -std::numeric_limits<double>::infinity();
    std::vector<PathPiece> pieces;
    std::vector<Crossing> crossings;
    auto const steps = detail::step_count(config);
    for (std::int64_t k = 0; k < steps; ++k)
    {
        double const t0 = static_cast<double>(k) * config.time_step;
        double const t1
            = std::min(static_cast<double>(k + 1) * config.time_step, end);
        pieces.clear();
        crossings.clear();
        advance_blockers(blockers, t0, t1 - t0, mob, rng, pieces);
        detect_crossings(pieces, links, crossings);
        for (auto const& c : crossings)
        {
            if (c.time >= start)
                ++res.crossings;
            bool const was_blocked = links[0].blocked_at(c.time);
            apply_crossing(links[0], c.time, config.scene.mu, config.mode, rng);
            if (!was_blocked)
            {
                if (busy_end > busy_start)
                    add_blocked(busy_start, busy_end);
                busy_start = c.time;
            }
            busy_end = links[0].blocked_until();
        }
        expire(links[0], t1);
    }
    if (busy_end > busy_start)
        add_blocked(busy_start, busy_end);

    res.observed_time = end - start;
    res.crossing_rate = static_cast<double>(res.crossings) / res.observed_time;
    std::vector<double> fractions;
    for (double b : batch_blocked)
        fractions.push_back(b / batch_len);
    auto const e = estimate(fractions);
    res.blocked_fraction = e.mean;
    res.blocked_fraction_se = e.half_width / 1.959963984540054;
    return res;
}

} // namespace mmblock::sim
