#pragma once

// Independent re-derivations of the closed forms from their defining
// integrals, sums and expectations. Used as ground truth by the tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mmblock/errors.hpp"
#include "mmblock/model.hpp"
#include "mmblock/rng.hpp"
#include "mmblock/scene.hpp"
#include "mmblock/summation.hpp"

namespace mmblock::oracle {

/// Link lengths of the N BSs outside the self-blockage sector.
struct LinkSet
{
    std::vector<double> distances;

    std::size_t size() const noexcept { return distances.size(); }
};

/// Throws unless every distance lies in (0, R].
inline void validate(LinkSet const& links, double radius)
{
    for (double r : links.distances)
        if (!(r > 0.0 && r <= radius))
            throw ParameterError("distances", "link length must lie in "
                                              "(0, R], got "
                                                  + detail::fmt_value(r));
}

/// prod_i (C r_i/mu) / (1 + C r_i/mu); the empty product is 1.
inline double conditional_blockage_given_links(LinkSet const& links,
                                               SceneParams const& params)
{
    validate(links, params.radius);
    double const c_over_mu = crossing_coefficient(params) / params.mu;
    double prob = 1.0;
    for (double r : links.distances)
    {
        double const q = c_over_mu * r;
        prob *= q / (1.0 + q);
    }
    return prob;
}

/// Rate of entering the all-blocked state: n mu P(B | n, {r_i}).
inline double frequency_given_links(LinkSet const& links,
                                    SceneParams const& params)
{
    return static_cast<double>(links.size()) * params.mu
           * conditional_blockage_given_links(links, params);
}

/// N ~ Poisson(mean); each distance has density 2r/R^2 (r = R sqrt(u)).
inline LinkSet sample_links(double mean, double radius, Engine& rng)
{
    if (!(mean >= 0.0))
        throw ParameterError("mean", "Poisson mean must be non-negative");
    LinkSet links;
    if (mean == 0.0)
        return links;
    auto const n = std::poisson_distribution<std::int64_t>(mean)(rng);
    links.distances.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
    {
        // 1-u keeps r strictly positive
        double const u = 1.0 - uniform01(rng);
        links.distances.push_back(radius * std::sqrt(u));
    }
    return links;
}

inline LinkSet sample_links(double mean, double radius, std::uint64_t seed)
{
    Engine rng(seed);
    return sample_links(mean, radius, rng);
}

struct McEstimate
{
    double blockage_prob = 0;
    double blockage_prob_se = 0;
    double frequency = 0; ///< marginal E[zeta_B], per second
    double frequency_se = 0;
    double empty_fraction = 0; ///< fraction of draws with N = 0
    std::int64_t samples = 0;
};

/// Sample means of P(B | N, {R_i}) and zeta_B over sampled link sets.
inline McEstimate mc_marginalize(SceneParams const& params,
                                 std::int64_t num_samples, std::uint64_t seed)
{
    validate(params);
    if (num_samples < 10000)
        throw ParameterError("num_samples", "at least 1e4 samples required");
    double const nu = poisson_mean(params);
    Engine rng(seed);

    CompensatedSum sum_p, sum_p2, sum_f, sum_f2;
    std::int64_t empty = 0;
    for (std::int64_t i = 0; i < num_samples; ++i)
    {
        auto const links = sample_links(nu, params.radius, rng);
        if (links.size() == 0)
            ++empty;
        double const pb = conditional_blockage_given_links(links, params);
        double const f = static_cast<double>(links.size()) * params.mu * pb;
        sum_p += pb;
        sum_p2 += pb * pb;
        sum_f += f;
        sum_f2 += f * f;
    }

    double const n = static_cast<double>(num_samples);
    auto se = [n](double s, double s2) {
        double const mean = s / n;
        double const var = std::max(0.0, (s2 / n - mean * mean)) * n / (n - 1);
        return std::sqrt(var / n);
    };
    McEstimate est;
    est.samples = num_samples;
    est.blockage_prob = sum_p.value() / n;
    est.blockage_prob_se = se(sum_p.value(), sum_p2.value());
    est.frequency = sum_f.value() / n;
    est.frequency_se = se(sum_f.value(), sum_f2.value());
    est.empty_fraction = static_cast<double>(empty) / n;
    return est;
}

/// int_0^1 2u / (1 + x u) du, i.e. the average unblocked weight
/// E[1 - (C r/mu)/(1 + C r/mu)] over the link-length density 2r/R^2,
/// written in u = r/R.
inline double quadrature_a_ratio(double x)
{
    if (!(x >= 0.0))
        throw ParameterError("x", "ratio RC/mu must be non-negative");
    auto integrand = [x](double u) { return 2.0 * u / (1.0 + x * u); };
    double error = 0.0;
    double const value
        = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, 0.0, 1.0, 15, 1e-14, &error);
    if (!(error <= 1e-12))
        throw ConvergenceError("quadrature of a did not reach 1e-12 "
                               "(estimated error "
                               + detail::fmt_value(error) + ")");
    return value;
}

/// Same integral in physical units: int_0^R [1 - (Cr/mu)/(1+Cr/mu)] 2r/R^2 dr.
inline double quadrature_a(SceneParams const& params)
{
    validate(params);
    double const c_over_mu = crossing_coefficient(params) / params.mu;
    double const radius = params.radius;
    auto integrand = [&](double r) {
        double const q = c_over_mu * r;
        return (1.0 - q / (1.0 + q)) * 2.0 * r / (radius * radius);
    };
    double error = 0.0;
    double const value
        = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, 0.0, radius, 15, 1e-14, &error);
    if (!(error <= 1e-12))
        throw ConvergenceError("quadrature of a did not reach 1e-12 "
                               "(estimated error "
                               + detail::fmt_value(error) + ")");
    return value;
}

namespace detail {
/// Sums f(n) P_N(n) for n >= first with the pmf built by the recursion
/// p_n = p_{n-1} nu / n. Valid for nu below ~700.
template<class F>
double poisson_weighted_sum(double nu, std::int64_t first, F&& f)
{
    CompensatedSum sum;
    double pmf = std::exp(-nu);
    for (std::int64_t n = 0;; ++n)
    {
        if (n > 0)
            pmf *= nu / static_cast<double>(n);
        if (n < first)
            continue;
        double const term = f(n) * pmf;
        sum += term;
        if (static_cast<double>(n) > nu
            && std::fabs(term) < 1e-17 * std::fabs(sum.value()))
            break;
        if (n > 100000)
            throw ConvergenceError("Poisson-weighted sum did not converge");
    }
    return sum.value();
}
} // namespace detail

/// sum_{n>=0} (1-a)^n P_N(n), with a from quadrature.
inline double blockage_probability_direct_sum(SceneParams const& params)
{
    double const one_minus_a = 1.0 - quadrature_a(params);
    return detail::poisson_weighted_sum(
        poisson_mean(params), 0, [&](std::int64_t n) {
            return std::pow(one_minus_a, static_cast<double>(n));
        });
}

/// sum_{n>=0} n mu (1-a)^n P_N(n), with a from quadrature.
inline double frequency_direct_sum(SceneParams const& params)
{
    double const one_minus_a = 1.0 - quadrature_a(params);
    return detail::poisson_weighted_sum(
        poisson_mean(params), 0, [&](std::int64_t n) {
            double const dn = static_cast<double>(n);
            return dn * params.mu * std::pow(one_minus_a, dn);
        });
}

/// sum_{n>=1} (1/(n mu)) P_N(n) / P(C).
inline double duration_direct_sum(SceneParams const& params)
{
    double const nu = poisson_mean(params);
    if (!(nu > 0.0))
        throw ParameterError("nu", "Poisson mean must be positive");
    double const coverage = 1.0 - std::exp(-nu);
    double const sum
        = detail::poisson_weighted_sum(nu, 1, [&](std::int64_t n) {
              return 1.0 / (static_cast<double>(n) * params.mu);
          });
    return sum / coverage;
}

} // namespace mmblock::oracle
