#pragma once

// Closed-form blockage statistics for a UE served by any of the LOS base
// stations in a disc of radius R, under mobile blockers and self-blockage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "mmblock/errors.hpp"
#include "mmblock/scene.hpp"
#include "mmblock/summation.hpp"

namespace mmblock {

struct DerivedCoefficients
{
    double crossing_coeff = 0; ///< C, 1/(m s)
    double survival = 1;       ///< p, fraction of the disc outside the sector
    double ratio = 0;          ///< x = R C / mu
    double a = 1;              ///< single-link average unblocked weight
    double poisson_mean = 0;   ///< nu = p lambda_T pi R^2
};

struct BlockageStats
{
    double coverage_prob = 0;
    double blockage_prob_marginal = 1;
    double blockage_prob_conditional = 0;
    double expected_freq_conditional = 0;     ///< events per second
    double expected_duration_conditional = 0; ///< seconds
};

/// C = (2/pi) lambda_B V (h_B - h_R)/(h_T - h_R).
inline double crossing_coefficient(SceneParams const& params)
{
    validate(params);
    return 2.0 / std::numbers::pi * params.blocker_density
           * params.blocker_speed * effective_length_fraction(params);
}

/// Poisson intensity of blocker crossings of a link of length r.
inline double blockage_rate(double r, SceneParams const& params)
{
    validate(params);
    if (!(r >= 0.0 && r <= params.radius))
        throw ParameterError("r", "link length must lie in [0, R], got "
                                      + detail::fmt_value(r));
    return crossing_coefficient(params) * r;
}

/// p = 1 - omega/(2 pi).
inline double self_blockage_fraction(double omega)
{
    if (!(omega >= 0.0 && omega < two_pi))
        throw ParameterError("omega", "self-blockage angle must lie in [0, "
                                      "2*pi), got "
                                          + detail::fmt_value(omega));
    return 1.0 - omega / two_pi;
}

/// Mean number of BSs in the disc outside the self-blockage sector.
inline double poisson_mean(SceneParams const& params)
{
    validate(params);
    return self_blockage_fraction(params.omega) * params.bs_density
           * std::numbers::pi * params.radius * params.radius;
}

/// a(x) = (2/x) (1 - ln(1+x)/x), with x = R C / mu.
///
/// Below x = 1e-3 the direct form cancels catastrophically and the series
/// sum_k 2 (-x)^k / (k+2) is used instead.
inline double a_factor(double x)
{
    if (!(x >= 0.0) || std::isinf(x))
        throw ParameterError("x", "ratio RC/mu must be finite and "
                                  "non-negative, got "
                                      + detail::fmt_value(x));
    if (x >= 1e-3)
        return 2.0 / x * (1.0 - std::log1p(x) / x);

    double sum = 0.0;
    double power = 1.0;
    for (int k = 0; k < 64; ++k)
    {
        double const term = 2.0 * power / (k + 2);
        sum += (k % 2 == 0) ? term : -term;
        if (term < 1e-16)
            break;
        power *= x;
    }
    return sum;
}

inline DerivedCoefficients derive(SceneParams const& params)
{
    validate(params);
    DerivedCoefficients d;
    d.crossing_coeff = crossing_coefficient(params);
    d.survival = self_blockage_fraction(params.omega);
    d.ratio = params.radius * d.crossing_coeff / params.mu;
    d.a = a_factor(d.ratio);
    d.poisson_mean = poisson_mean(params);
    return d;
}

/// P(C) = 1 - exp(-nu).
inline double coverage_probability(SceneParams const& params)
{
    return -std::expm1(-poisson_mean(params));
}

/// P(B) = exp(-a nu). Equals 1 when there are no BSs.
inline double blockage_probability_marginal(SceneParams const& params)
{
    auto const d = derive(params);
    return std::exp(-d.a * d.poisson_mean);
}

namespace detail {
inline void require_coverage(double nu, char const* what)
{
    if (!(nu > 0.0))
        throw UndefinedQuantity(std::string(what)
                                + " is undefined: coverage probability is "
                                  "zero (no BS outside the self-blockage "
                                  "sector)");
}

inline double clamp_unit(double v)
{
    if (v < 0.0 && v > -1e-15)
        return 0.0;
    if (v > 1.0 && v < 1.0 + 1e-15)
        return 1.0;
    return v;
}
} // namespace detail

/// P(B|C) = (exp(-a nu) - exp(-nu)) / (1 - exp(-nu)).
inline double blockage_probability_conditional(SceneParams const& params)
{
    auto const d = derive(params);
    double const nu = d.poisson_mean;
    detail::require_coverage(nu, "P(B|C)");
    // exp(-a nu) - exp(-nu) = exp(-a nu) (1 - exp(-(1-a) nu))
    double const num = std::exp(-d.a * nu) * -std::expm1(-(1.0 - d.a) * nu);
    return detail::clamp_unit(num / -std::expm1(-nu));
}

/// E[zeta_B] = mu (1-a) nu exp(-a nu), events per second.
inline double expected_frequency_marginal(SceneParams const& params)
{
    auto const d = derive(params);
    return params.mu * (1.0 - d.a) * d.poisson_mean
           * std::exp(-d.a * d.poisson_mean);
}

/// E[zeta_B | C] = E[zeta_B] / P(C), events per second.
inline double expected_frequency_conditional(SceneParams const& params)
{
    auto const d = derive(params);
    detail::require_coverage(d.poisson_mean, "E[zeta_B|C]");
    return expected_frequency_marginal(params) / -std::expm1(-d.poisson_mean);
}

namespace detail {
inline std::int64_t ei_term_cap(double x)
{
    return 50 + static_cast<std::int64_t>(std::ceil(10.0 * x));
}
} // namespace detail

/// Sum_{n>=1} x^n / (n n!).
///
/// Stops once the next term drops below 1e-14 of the partial sum or after
/// 50 + ceil(10 x) terms.
inline double ei_series(double x)
{
    if (!(x >= 0.0) || std::isinf(x))
        throw ParameterError("x", "Ei series argument must be finite and "
                                  "non-negative, got "
                                      + detail::fmt_value(x));
    if (x == 0.0)
        return 0.0;
    auto const cap = detail::ei_term_cap(x);
    CompensatedSum sum;
    double term = x; // n = 1
    for (std::int64_t n = 1;; ++n)
    {
        sum += term;
        // t_{n+1} = t_n x n / (n+1)^2
        double const next = term * x * static_cast<double>(n)
                            / (static_cast<double>(n + 1) * (n + 1));
        if (next < 1e-14 * sum.value() || n + 1 > cap)
            break;
        term = next;
    }
    return sum.value();
}

/// exp(-x) Ei[x], evaluated without overflow for large x.
inline double ei_series_scaled(double x)
{
    if (x <= 600.0)
        return std::exp(-x) * ei_series(x);
    auto const cap = detail::ei_term_cap(x);
    double const log_x = std::log(x);
    CompensatedSum sum;
    for (std::int64_t n = 1; n <= cap; ++n)
    {
        double const dn = static_cast<double>(n);
        double const term = std::exp(dn * log_x - std::log(dn)
                                     - std::lgamma(dn + 1.0) - x);
        sum += term;
        if (dn > x && term < 1e-14 * sum.value())
            break;
    }
    return sum.value();
}

/// E[T_B | C] = exp(-nu) Ei[nu] / (mu (1 - exp(-nu))), seconds.
/// Independent of the blocker density.
inline double expected_duration_conditional(SceneParams const& params)
{
    double const nu = poisson_mean(params);
    detail::require_coverage(nu, "E[T_B|C]");
    return ei_series_scaled(nu) / (params.mu * -std::expm1(-nu));
}

/// Second-order Taylor approximation E[1/N] ~ 1/nu + 1/nu^2, scaled by 1/mu.
inline double expected_duration_approx(double nu, double mu)
{
    if (!(nu > 0.0))
        throw ParameterError("nu", "Poisson mean must be positive, got "
                                       + detail::fmt_value(nu));
    return (1.0 / nu + 1.0 / (nu * nu)) / mu;
}

/// Variant 1/(mu nu) + 1/(mu nu)^2, the form quoted alongside the figures.
inline double expected_duration_approx_in_text(double nu, double mu)
{
    if (!(nu > 0.0))
        throw ParameterError("nu", "Poisson mean must be positive, got "
                                       + detail::fmt_value(nu));
    double const inv = 1.0 / (mu * nu);
    return inv + inv * inv;
}

inline double expected_duration_approx(SceneParams const& params)
{
    return expected_duration_approx(poisson_mean(params), params.mu);
}

/// Poisson pmf, evaluated in log space.
inline double bs_count_pmf(std::int64_t n, double mean)
{
    if (n < 0)
        throw ParameterError("n", "count must be non-negative");
    if (!(mean >= 0.0))
        throw ParameterError("mean", "Poisson mean must be non-negative");
    if (mean == 0.0)
        return n == 0 ? 1.0 : 0.0;
    double const dn = static_cast<double>(n);
    return std::exp(dn * std::log(mean) - mean - std::lgamma(dn + 1.0));
}

/// All five statistics. The conditional fields require coverage.
inline BlockageStats analyze(SceneParams const& params)
{
    BlockageStats s;
    s.coverage_prob = coverage_probability(params);
    s.blockage_prob_marginal = blockage_probability_marginal(params);
    s.blockage_prob_conditional = blockage_probability_conditional(params);
    s.expected_freq_conditional = expected_frequency_conditional(params);
    s.expected_duration_conditional = expected_duration_conditional(params);
    return s;
}

} // namespace mmblock
