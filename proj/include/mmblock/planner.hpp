#pragma once

// Inverts the closed-form model into deployment answers: minimum BS
// density for a QoS target, the BS height/density trade-off, and the
// playback cache needed to ride through blockages.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "mmblock/errors.hpp"
#include "mmblock/model.hpp"
#include "mmblock/scene.hpp"

namespace mmblock::plan {

/// Which blockage probability the target bounds.
enum class ProbabilityForm
{
    conditional, ///< P(B|C), the default
    marginal,    ///< P(B)
};

struct QoSTarget
{
    double max_blockage_prob = 1e-5;
    std::optional<double> max_frequency; ///< per second
    std::optional<double> max_duration;  ///< seconds
    ProbabilityForm form = ProbabilityForm::conditional;
};

enum class Constraint
{
    blockage_probability,
    frequency,
    duration,
};

enum class Method
{
    closed_form,
    exact_bisection,
};

constexpr std::string_view to_string(Constraint c)
{
    switch (c)
    {
    case Constraint::blockage_probability: return "blockage_probability";
    case Constraint::frequency: return "frequency";
    case Constraint::duration: return "duration";
    }
    return "?";
}

constexpr std::string_view to_string(Method m)
{
    return m == Method::closed_form ? "closed_form" : "exact_bisection";
}

struct PlanResult
{
    double min_lambda_T = 0; ///< per m^2
    Constraint binding_constraint = Constraint::blockage_probability;
    Method method = Method::exact_bisection;
    /// Closed form only: the linearized-a approximation.
    std::optional<double> approx_lambda_T;
};

inline QoSTarget const& validate(QoSTarget const& target)
{
    auto const& p = target.max_blockage_prob;
    if (!(p > 0.0 && p < 1.0))
        throw ParameterError("max_blockage_prob",
                             "must lie in (0, 1), got " + mmblock::detail::fmt_value(p));
    if (target.max_frequency && !(*target.max_frequency > 0.0))
        throw ParameterError("max_frequency", "must be positive");
    if (target.max_duration && !(*target.max_duration > 0.0))
        throw ParameterError("max_duration", "must be positive");
    return target;
}

namespace detail {
inline SceneParams with_density(SceneParams scene, double lambda_t)
{
    scene.bs_density = lambda_t;
    return scene;
}

/// Smallest x in (lo, hi] with f(x) <= target for a decreasing f, by
/// bisection until |f - target| / target < 1e-9.
template<class F>
double bisect_decreasing(F&& f, double target, double lo, double hi)
{
    for (int i = 0; i < 400; ++i)
    {
        double const mid = 0.5 * (lo + hi);
        double const v = f(mid);
        if (std::fabs(v - target) < 1e-9 * target)
            return mid;
        if (mid <= lo || mid >= hi)
            break;
        if (v > target)
            lo = mid;
        else
            hi = mid;
    }
    if (std::fabs(f(hi) - target) < 1e-9 * target)
        return hi;
    throw ConvergenceError("bisection could not meet the target to 1e-9");
}

inline double probability_at(SceneParams const& scene, double lambda_t,
                             ProbabilityForm form)
{
    auto const s = with_density(scene, lambda_t);
    return form == ProbabilityForm::conditional
               ? blockage_probability_conditional(s)
               : blockage_probability_marginal(s);
}

/// Doubles `hi` until f(hi) <= target.
template<class F>
double bracket_above(F&& f, double target, double hi)
{
    for (int i = 0; i < 200; ++i)
    {
        if (f(hi) <= target)
            return hi;
        hi *= 2.0;
    }
    throw ConvergenceError("target could not be bracketed");
}
} // namespace detail

/// lambda_T = -ln(Pbar) / (a p pi R^2), the density at which P(B) = Pbar,
/// together with the linearized form -ln(Pbar)(1 + 2RC/(3 mu))/(p pi R^2).
inline PlanResult min_density_closed_form(QoSTarget const& target,
                                          SceneParams const& scene)
{
    validate(target);
    auto const d = derive(scene);
    if (!(d.survival > 0.0))
        throw ParameterError("omega", "self-blockage covers the whole disc");
    double const area = d.survival * std::numbers::pi * scene.radius
                        * scene.radius;
    double const log_p = -std::log(target.max_blockage_prob);
    PlanResult r;
    r.method = Method::closed_form;
    r.binding_constraint = Constraint::blockage_probability;
    r.min_lambda_T = log_p / (d.a * area);
    r.approx_lambda_T = log_p * (1.0 + 2.0 * d.ratio / 3.0) / area;
    return r;
}

/// Minimum density meeting the probability bound alone.
inline double min_density_for_probability(double max_prob,
                                          SceneParams const& scene,
                                          ProbabilityForm form)
{
    QoSTarget t;
    t.max_blockage_prob = max_prob;
    t.form = form;
    double const bound = min_density_closed_form(t, scene).min_lambda_T;
    auto const d = derive(scene);
    // P(B|C) -> 1 - a as lambda_T -> 0
    if (form == ProbabilityForm::conditional && 1.0 - d.a <= max_prob)
        return 0.0;
    auto f = [&](double l) {
        return detail::probability_at(scene, l, form);
    };
    double const hi = detail::bracket_above(f, max_prob, 10.0 * bound);
    return detail::bisect_decreasing(f, max_prob, 0.0, hi);
}

/// Minimum density above which E[zeta_B|C] stays below `max_freq`. The
/// frequency is unimodal in lambda_T; the answer lies on its decreasing side.
inline double min_density_for_frequency(double max_freq,
                                        SceneParams const& scene)
{
    auto f = [&](double l) {
        return expected_frequency_conditional(detail::with_density(scene, l));
    };
    auto const d = derive(scene);
    if (d.a >= 1.0)
        return 0.0;
    double const unit = d.survival * std::numbers::pi * scene.radius
                        * scene.radius;
    // golden-section search for the peak over nu in (0, 20/a]
    double lo = 1e-12 / unit;
    double hi = 20.0 / (d.a * unit);
    double const g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 200; ++i)
    {
        double const m1 = hi - g * (hi - lo);
        double const m2 = lo + g * (hi - lo);
        if (f(m1) < f(m2))
            lo = m1;
        else
            hi = m2;
    }
    double const peak = 0.5 * (lo + hi);
    if (f(peak) <= max_freq)
        return 0.0;
    double const top = detail::bracket_above(f, max_freq, 2.0 * peak);
    return detail::bisect_decreasing(f, max_freq, peak, top);
}

/// Minimum density at which E[T_B|C] <= max_duration. The duration falls
/// from 1/mu as lambda_T -> 0.
inline double min_density_for_duration(double max_duration,
                                       SceneParams const& scene)
{
    validate(scene);
    if (max_duration >= 1.0 / scene.mu)
        return 0.0;
    auto f = [&](double l) {
        return expected_duration_conditional(detail::with_density(scene, l));
    };
    double const unit = self_blockage_fraction(scene.omega) * std::numbers::pi
                        * scene.radius * scene.radius;
    double const top = detail::bracket_above(f, max_duration, 1.0 / unit);
    return detail::bisect_decreasing(f, max_duration, 0.0, top);
}

/// Largest of the per-constraint minimum densities; the binding constraint
/// is the one that produced it.
inline PlanResult min_density_exact(QoSTarget const& target,
                                    SceneParams const& scene)
{
    validate(target);
    validate(scene);
    PlanResult r;
    r.method = Method::exact_bisection;
    r.binding_constraint = Constraint::blockage_probability;
    r.min_lambda_T = min_density_for_probability(target.max_blockage_prob,
                                                 scene, target.form);
    if (target.max_frequency)
    {
        double const l = min_density_for_frequency(*target.max_frequency, scene);
        if (l > r.min_lambda_T)
        {
            r.min_lambda_T = l;
            r.binding_constraint = Constraint::frequency;
        }
    }
    if (target.max_duration)
    {
        double const l = min_density_for_duration(*target.max_duration, scene);
        if (l > r.min_lambda_T)
        {
            r.min_lambda_T = l;
            r.binding_constraint = Constraint::duration;
        }
    }
    return r;
}

struct HeightPoint
{
    double bs_height = 0;    ///< m
    double min_lambda_T = 0; ///< per m^2
};

/// min_density_exact at each BS height.
inline std::vector<HeightPoint> height_density_curve(QoSTarget const& target,
                                                     SceneParams const& scene,
                                                     std::vector<double> const& heights)
{
    for (double h : heights)
        if (!(h > scene.blocker_height))
            throw ParameterError("heights",
                                 "BS height " + mmblock::detail::fmt_value(h)
                                     + " does not exceed the blocker height");
    std::vector<HeightPoint> curve;
    curve.reserve(heights.size());
    for (double h : heights)
    {
        SceneParams s = scene;
        s.bs_height = h;
        curve.push_back({h, min_density_exact(target, s).min_lambda_T});
    }
    return curve;
}

struct CacheRequirement
{
    double duration = 0; ///< s of content, E[T_B|C]
    double mean_time_between_blockages = 0; ///< s, 1/E[zeta_B|C]
};

inline CacheRequirement cache_requirement(SceneParams const& scene)
{
    validate(scene);
    if (!(scene.bs_density > 0.0))
        throw ParameterError("bs_density",
                             "cache sizing needs a positive BS density");
    CacheRequirement c;
    c.duration = expected_duration_conditional(scene);
    double const f = expected_frequency_conditional(scene);
    c.mean_time_between_blockages
        = f > 0.0 ? 1.0 / f : std::numeric_limits<double>::infinity();
    return c;
}

} // namespace mmblock::plan
