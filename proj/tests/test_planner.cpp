#include "mmblock/planner.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

namespace mmblock::test {
namespace {

using namespace mmblock::plan;
using std::numbers::pi;

constexpr double km2 = 1e-6;

SceneParams scene(double lambda_b, double lambda_t = 200e-6)
{
    SceneParams s;
    s.blocker_density = lambda_b;
    s.bs_density = lambda_t;
    return s;
}

double floor_density(double pbar)
{
    return -std::log(pbar) / (5.0 / 6.0 * pi * 100.0 * 100.0);
}

TEST(TargetValidation, RejectsOutOfRange)
{
    QoSTarget t;
    t.max_blockage_prob = 0.0;
    EXPECT_THROW(validate(t), ParameterError);
    t.max_blockage_prob = 1.0;
    EXPECT_THROW(validate(t), ParameterError);
    t = {};
    t.max_frequency = -1.0;
    EXPECT_THROW(validate(t), ParameterError);
    t = {};
    t.max_duration = 0.0;
    EXPECT_THROW(validate(t), ParameterError);
}

TEST(ClosedForm, ReferenceDensity)
{
    auto const r = min_density_closed_form({}, scene(0.01));
    EXPECT_EQ(r.method, Method::closed_form);
    EXPECT_NEAR(r.min_lambda_T / km2, 450.1003, 1e-3);
    ASSERT_TRUE(r.approx_lambda_T);
    EXPECT_NEAR(*r.approx_lambda_T / km2, 450.13, 0.01);
    // meets the marginal bound with equality
    EXPECT_NEAR(blockage_probability_marginal(scene(0.01, r.min_lambda_T)),
                1e-5, 1e-14);
}

TEST(ClosedForm, NoBlockersGivesCoverageFloor)
{
    auto const r = min_density_closed_form({}, scene(0.0));
    EXPECT_NEAR(r.min_lambda_T, floor_density(1e-5), 1e-15);
    EXPECT_NEAR(*r.approx_lambda_T, floor_density(1e-5), 1e-15);
}

TEST(ClosedForm, LinearizedDensityIsAffineInBlockerDensity)
{
    double const y0 = *min_density_closed_form({}, scene(0.0)).approx_lambda_T;
    double const y1 = *min_density_closed_form({}, scene(0.1)).approx_lambda_T;
    double const y2 = *min_density_closed_form({}, scene(0.2)).approx_lambda_T;
    EXPECT_NEAR(y2 - y1, y1 - y0, 1e-12 * y2);
    EXPECT_GT(y1, y0);
}

TEST(Exact, ReferenceDensity)
{
    auto const s = scene(0.01);
    auto const r = min_density_exact({}, s);
    EXPECT_EQ(r.method, Method::exact_bisection);
    EXPECT_EQ(r.binding_constraint, Constraint::blockage_probability);
    EXPECT_NEAR(r.min_lambda_T / km2, 388.8057, 1e-3);
    EXPECT_GE(r.min_lambda_T / km2, 380.0);
    EXPECT_LE(r.min_lambda_T / km2, 470.0);
    EXPECT_LE(r.min_lambda_T, min_density_closed_form({}, s).min_lambda_T);
    double const p = blockage_probability_conditional(scene(0.01, r.min_lambda_T));
    EXPECT_LT(std::fabs(p - 1e-5) / 1e-5, 1e-9);
}

TEST(Exact, MarginalFormReproducesClosedForm)
{
    QoSTarget t;
    t.form = ProbabilityForm::marginal;
    for (double lb : {0.0, 0.01, 0.1, 0.3})
    {
        auto const s = scene(lb);
        double const exact = min_density_exact(t, s).min_lambda_T;
        double const closed = min_density_closed_form(t, s).min_lambda_T;
        EXPECT_NEAR(exact / closed, 1.0, 1e-8) << lb;
    }
}

TEST(Exact, LooseTargetNeedsNoInfrastructure)
{
    auto const s = scene(0.1);
    double const ceiling = 1.0 - derive(s).a;
    QoSTarget t;
    t.max_blockage_prob = ceiling + 1e-3;
    EXPECT_EQ(min_density_exact(t, s).min_lambda_T, 0.0);
}

TEST(Exact, MonotoneInTarget)
{
    auto const s = scene(0.01);
    double prev = std::numeric_limits<double>::infinity();
    for (double pbar : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3})
    {
        QoSTarget t;
        t.max_blockage_prob = pbar;
        double const l = min_density_exact(t, s).min_lambda_T;
        EXPECT_LT(l, prev) << pbar;
        prev = l;
    }
}

TEST(Exact, FrequencyConstraint)
{
    auto const s = scene(0.1);
    QoSTarget t;
    t.max_blockage_prob = 0.5;
    t.max_frequency = 1.0 / 60.0;
    auto const r = min_density_exact(t, s);
    EXPECT_EQ(r.binding_constraint, Constraint::frequency);
    double const f = expected_frequency_conditional(scene(0.1, r.min_lambda_T));
    EXPECT_LT(std::fabs(f - 1.0 / 60.0) * 60.0, 1e-9);
    // on the decreasing side of the frequency curve
    EXPECT_LT(expected_frequency_conditional(scene(0.1, 1.01 * r.min_lambda_T)), f);
    // 1/F = 35.9 s at 200/km^2 so a 60 s target needs more
    EXPECT_GT(r.min_lambda_T / km2, 200.0);
    EXPECT_LT(r.min_lambda_T / km2, 300.0);

    t.max_frequency = 10.0; // above the peak
    EXPECT_EQ(min_density_for_frequency(10.0, s), 0.0);
}

TEST(Exact, DurationConstraint)
{
    auto const s = scene(0.1);
    double const l = min_density_for_duration(0.1, s);
    EXPECT_NEAR(l / km2, 236.57, 0.01);
    EXPECT_LT(std::fabs(expected_duration_conditional(scene(0.1, l)) - 0.1) / 0.1,
              1e-9);
    EXPECT_EQ(min_density_for_duration(0.5, s), 0.0);

    QoSTarget t;
    t.max_blockage_prob = 0.5;
    t.max_duration = 0.1;
    auto const r = min_density_exact(t, s);
    EXPECT_EQ(r.binding_constraint, Constraint::duration);
    EXPECT_DOUBLE_EQ(r.min_lambda_T, l);
}

TEST(HeightCurve, DecreasingWithHeight)
{
    std::vector<double> heights;
    for (double h = 2.0; h <= 10.0; h += 0.5)
        heights.push_back(h);
    auto const curve = height_density_curve({}, scene(0.1), heights);
    ASSERT_EQ(curve.size(), heights.size());
    for (std::size_t i = 1; i < curve.size(); ++i)
        EXPECT_LT(curve[i].min_lambda_T, curve[i - 1].min_lambda_T);
}

TEST(HeightCurve, RaisingBaseStationsFromFourToEightMetres)
{
    auto const curve = height_density_curve({}, scene(0.1), {4.0, 8.0});
    EXPECT_NEAR(curve[0].min_lambda_T / km2, 577.29, 0.01);
    EXPECT_NEAR(curve[1].min_lambda_T / km2, 483.64, 0.01);
    double const cut = 1.0 - curve[1].min_lambda_T / curve[0].min_lambda_T;
    EXPECT_NEAR(cut, 0.162, 0.001);
    EXPECT_GT(cut, 0.10);
    EXPECT_LT(cut, 0.25);
}

TEST(HeightCurve, RejectsHeightsAtOrBelowBlockers)
{
    EXPECT_THROW(height_density_curve({}, scene(0.1), {1.8}), ParameterError);
    EXPECT_THROW(height_density_curve({}, scene(0.1), {5.0, 1.0}), ParameterError);
}

TEST(HeightCurve, MarginalFormApproachesCoverageFloor)
{
    QoSTarget t;
    t.form = ProbabilityForm::marginal;
    auto const curve = height_density_curve(t, scene(0.1), {10.0, 100.0, 1e6});
    double const floor = floor_density(1e-5);
    for (auto const& p : curve)
        EXPECT_GT(p.min_lambda_T, floor);
    EXPECT_NEAR(curve.back().min_lambda_T / floor, 1.0, 1e-5);
}

TEST(Cache, RequirementValues)
{
    auto const c200 = cache_requirement(scene(0.1, 200e-6));
    EXPECT_NEAR(c200.duration, 0.12215479199600364, 1e-12);
    EXPECT_NEAR(c200.mean_time_between_blockages, 35.88, 0.01);
    auto const c500 = cache_requirement(scene(0.1, 500e-6));
    EXPECT_NEAR(c500.duration, 0.04171692676802571, 1e-12);
}

TEST(Cache, ScalesInverselyWithMu)
{
    auto s = scene(0.1, 300e-6);
    double const d = cache_requirement(s).duration;
    s.mu *= 2;
    s.blocker_speed *= 2; // keeps alpha/mu and therefore nu and a fixed
    EXPECT_NEAR(cache_requirement(s).duration, d / 2, 1e-15);
}

TEST(Cache, RejectsZeroDensity)
{
    EXPECT_THROW(cache_requirement(scene(0.1, 0.0)), ParameterError);
}

TEST(Names, ToString)
{
    EXPECT_EQ(to_string(Constraint::duration), "duration");
    EXPECT_EQ(to_string(Constraint::frequency), "frequency");
    EXPECT_EQ(to_string(Constraint::blockage_probability), "blockage_probability");
    EXPECT_EQ(to_string(Method::closed_form), "closed_form");
    EXPECT_EQ(to_string(Method::exact_bisection), "exact_bisection");
}

} // namespace
} // namespace mmblock::test
