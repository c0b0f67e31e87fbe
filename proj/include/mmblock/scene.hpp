#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "mmblock/errors.hpp"

namespace mmblock {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Physical and system parameters of a scene, all in SI units.
///
/// Densities are per square meter; `mu` is the unblocking rate so that
/// 1/mu is the mean blockage duration caused by a single blocker;
/// `omega` is the self-blockage sector angle in radians.
struct SceneParams
{
    double radius = 100.0;        ///< R, m
    double bs_height = 5.0;       ///< h_T, m
    double ue_height = 1.4;       ///< h_R, m
    double blocker_height = 1.8;  ///< h_B, m
    double bs_density = 200e-6;   ///< lambda_T, 1/m^2
    double blocker_density = 0.1; ///< lambda_B, 1/m^2
    double blocker_speed = 1.0;   ///< V, m/s
    double mu = 2.0;              ///< 1/s
    double omega = std::numbers::pi / 3.0;

    /// Defaults of the reference open-park deployment.
    static SceneParams reference() { return SceneParams{}; }
};

namespace detail {
inline std::string fmt_value(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void require(bool ok, char const* field, std::string const& why)
{
    if (!ok)
        throw ParameterError(field, why);
}
} // namespace detail

/// Returns `params` unchanged if every scene invariant holds, throws
/// ParameterError naming the offending field otherwise.
inline SceneParams const& validate(SceneParams const& params)
{
    using detail::fmt_value;
    using detail::require;
    auto finite = [](double v) { return std::isfinite(v); };

    require(finite(params.radius) && params.radius > 0, "radius",
            "must be positive, got " + fmt_value(params.radius));
    require(finite(params.blocker_speed) && params.blocker_speed >= 0,
            "blocker_speed",
            "must be non-negative, got " + fmt_value(params.blocker_speed));
    require(finite(params.mu) && params.mu > 0, "mu",
            "must be positive, got " + fmt_value(params.mu));
    require(finite(params.bs_density) && params.bs_density >= 0, "bs_density",
            "must be non-negative, got " + fmt_value(params.bs_density));
    require(finite(params.blocker_density) && params.blocker_density >= 0,
            "blocker_density",
            "must be non-negative, got " + fmt_value(params.blocker_density));
    require(finite(params.bs_height) && finite(params.blocker_height)
                && finite(params.ue_height),
            "heights", "must be finite");
    require(params.bs_height > params.blocker_height, "bs_height",
            "blocker taller than BS (h_T=" + fmt_value(params.bs_height)
                + " <= h_B=" + fmt_value(params.blocker_height)
                + "), model undefined");
    require(params.blocker_height > params.ue_height, "blocker_height",
            "must exceed UE height (h_B=" + fmt_value(params.blocker_height)
                + " <= h_R=" + fmt_value(params.ue_height) + ")");
    require(finite(params.omega) && params.omega >= 0
                && params.omega < two_pi,
            "omega",
            "self-blockage angle must lie in [0, 2*pi), got "
                + fmt_value(params.omega));
    return params;
}

/// Fraction of the UE-BS link (from the UE end) in which a blocker of height
/// h_B occludes the line of sight.
inline double effective_length_fraction(SceneParams const& params)
{
    return (params.blocker_height - params.ue_height)
           / (params.bs_height - params.ue_height);
}

} // namespace mmblock
