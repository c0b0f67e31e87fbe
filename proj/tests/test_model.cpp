#include "mmblock/model.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "mmblock/oracle.hpp"

namespace mmblock::test {
namespace {

using std::numbers::pi;
using big = boost::multiprecision::cpp_dec_float_50;

SceneParams scene(double lambda_t, double lambda_b, double omega = pi / 3)
{
    SceneParams s = SceneParams::reference();
    s.bs_density = lambda_t;
    s.blocker_density = lambda_b;
    s.omega = omega;
    return s;
}

// Independent 50-digit Poisson pmf.
double pmf_oracle(int n, double mean)
{
    big const m(mean);
    big term = exp(-m);
    for (int k = 1; k <= n; ++k)
        term *= m / k;
    return term.convert_to<double>();
}

// Independent 50-digit sum of x^n/(n n!).
double ei_oracle(double x)
{
    big const bx(x);
    big sum = 0, power = 1, fact = 1;
    for (int n = 1; n <= 200; ++n)
    {
        power *= bx;
        fact *= n;
        sum += power / (fact * n);
    }
    return sum.convert_to<double>();
}

TEST(Validate, ReferenceSceneIsValid)
{
    auto const s = SceneParams::reference();
    EXPECT_NO_THROW(validate(s));
    EXPECT_DOUBLE_EQ(s.radius, 100.0);
    EXPECT_DOUBLE_EQ(s.blocker_speed, 1.0);
    EXPECT_DOUBLE_EQ(s.blocker_height, 1.8);
    EXPECT_DOUBLE_EQ(s.ue_height, 1.4);
    EXPECT_DOUBLE_EQ(s.bs_height, 5.0);
    EXPECT_DOUBLE_EQ(s.mu, 2.0);
    EXPECT_DOUBLE_EQ(s.omega, pi / 3);
}

TEST(Validate, BlockerAsTallAsBsIsRejected)
{
    auto s = SceneParams::reference();
    s.bs_height = 1.8;
    try
    {
        validate(s);
        FAIL() << "expected ParameterError";
    }
    catch (ParameterError const& e)
    {
        EXPECT_EQ(e.field(), "bs_height");
        EXPECT_NE(std::string(e.what()).find("blocker taller than BS"),
                  std::string::npos);
    }
}

TEST(Validate, FullSectorIsRejected)
{
    auto s = SceneParams::reference();
    s.omega = 2 * pi;
    EXPECT_THROW(validate(s), ParameterError);
}

TEST(Validate, EachInvariantNamesItsField)
{
    auto expect_field = [](SceneParams s, std::string const& field) {
        try
        {
            validate(s);
            ADD_FAILURE() << "no error for " << field;
        }
        catch (ParameterError const& e)
        {
            EXPECT_EQ(e.field(), field);
        }
    };
    auto s = SceneParams::reference();
    expect_field([&] { auto t = s; t.radius = 0; return t; }(), "radius");
    expect_field([&] { auto t = s; t.blocker_speed = -1; return t; }(), "blocker_speed");
    expect_field([&] { auto t = s; t.mu = 0; return t; }(), "mu");
    expect_field([&] { auto t = s; t.bs_density = -1e-6; return t; }(), "bs_density");
    expect_field([&] { auto t = s; t.blocker_density = -0.1; return t; }(), "blocker_density");
    expect_field([&] { auto t = s; t.ue_height = 1.8; return t; }(), "blocker_height");
    expect_field([&] { auto t = s; t.omega = -0.1; return t; }(), "omega");
}

TEST(CrossingCoefficient, ReferenceValue)
{
    double const c = crossing_coefficient(scene(200e-6, 0.1));
    EXPECT_NEAR(c, 0.0070736, 5e-8);
    // 40-digit value of (2/pi) 0.1 (0.4/3.6)
    EXPECT_NEAR(c, 0.007073553026306460, 1e-17);
    EXPECT_NEAR(100.0 * c / 2.0, 0.3537, 1e-4);
}

TEST(CrossingCoefficient, NoBlockersOrStaticBlockers)
{
    EXPECT_EQ(crossing_coefficient(scene(200e-6, 0.0)), 0.0);
    auto s = scene(200e-6, 0.1);
    s.blocker_speed = 0;
    EXPECT_EQ(crossing_coefficient(s), 0.0);
}

TEST(BlockageRate, MatchesHeadingAverage)
{
    auto const s = scene(200e-6, 0.1);
    double const r = 100.0;
    // 2 lambda_B r_eff V E[sin(theta - phi)^+] with phi ~ Unif[0, 2 pi)
    double const theta = 0.7;
    double const r_eff = effective_length_fraction(s) * r;
    auto positive_sin = [&](double phi) {
        return std::max(0.0, std::sin(theta - phi)) / (2 * pi);
    };
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    double const avg = gk::integrate(positive_sin, theta - pi, theta, 10, 1e-14)
                       + gk::integrate(positive_sin, theta, theta + pi, 10, 1e-14);
    double const oracle = 2 * s.blocker_density * r_eff * s.blocker_speed * avg;

    double const alpha = blockage_rate(r, s);
    EXPECT_NEAR(alpha, 0.70736, 5e-6);
    EXPECT_NEAR(alpha, oracle, 1e-12);
}

TEST(BlockageRate, Edges)
{
    auto const s = scene(200e-6, 0.1);
    EXPECT_EQ(blockage_rate(0.0, s), 0.0);
    EXPECT_THROW(blockage_rate(-1.0, s), ParameterError);
    EXPECT_THROW(blockage_rate(100.5, s), ParameterError);
}

TEST(BlockageRate, ScalesWithHeightRatio)
{
    auto low = scene(200e-6, 0.1);
    auto high = low;
    high.bs_height = 8.6; // h_T - h_R doubles from 3.6 to 7.2
    EXPECT_NEAR(blockage_rate(50.0, high),
                blockage_rate(50.0, low) * (3.6 / 7.2), 1e-15);
}

TEST(SelfBlockage, Fractions)
{
    EXPECT_EQ(self_blockage_fraction(0.0), 1.0);
    EXPECT_DOUBLE_EQ(self_blockage_fraction(pi / 3), 5.0 / 6.0);
    EXPECT_DOUBLE_EQ(self_blockage_fraction(pi), 0.5);
    EXPECT_THROW(self_blockage_fraction(2 * pi), ParameterError);
    EXPECT_THROW(self_blockage_fraction(-0.01), ParameterError);
}

TEST(Coverage, Values)
{
    EXPECT_EQ(coverage_probability(scene(0.0, 0.1)), 0.0);
    double const p = coverage_probability(scene(200e-6, 0.1));
    // 1 - P_N(0) with the pmf summed from n = 1
    double const nu = poisson_mean(scene(200e-6, 0.1));
    double tail = 0;
    for (int n = 1; n < 80; ++n)
        tail += pmf_oracle(n, nu);
    EXPECT_NEAR(p, tail, 1e-14);
    EXPECT_NEAR(p, 0.994677, 5e-6);
    EXPECT_NEAR(nu, 5.23599, 5e-6);

    double prev = 0;
    for (double l : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2})
    {
        double const c = coverage_probability(scene(l, 0.1));
        EXPECT_GT(c, prev);
        prev = c;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(AFactor, NoBlockerLimit) { EXPECT_EQ(a_factor(0.0), 1.0); }

TEST(AFactor, ReferenceRatios)
{
    double const x = 100.0 * crossing_coefficient(scene(0, 0.1)) / 2.0;
    EXPECT_NEAR(x, 0.35368, 1e-5);
    EXPECT_NEAR(a_factor(x), 0.8130695979926204, 1e-15); // 40-digit mpmath
    EXPECT_NEAR(a_factor(x), oracle::quadrature_a_ratio(x), 1e-12);
    EXPECT_NEAR(a_factor(x), 0.8130, 1e-4);

    double const x2 = x / 10.0;
    EXPECT_NEAR(a_factor(x2), 0.9770297392312680, 1e-15);
    EXPECT_NEAR(a_factor(x2), oracle::quadrature_a_ratio(x2), 1e-12);
    EXPECT_LT(std::fabs(a_factor(x2) - (1 - 2 * x2 / 3)), 7e-4);
}

TEST(AFactor, BranchesAgreeAtCrossover)
{
    double const x = 1e-3;
    double const below = std::nextafter(x, 0.0);
    EXPECT_NEAR(a_factor(below), a_factor(x), 1e-12);
    // series at the crossover against the direct form at 50 digits
    big const bx(x);
    big const direct = 2 / bx * (1 - log(1 + bx) / bx);
    EXPECT_NEAR(a_factor(below), direct.convert_to<double>(), 1e-15);
    EXPECT_NEAR(a_factor(x), direct.convert_to<double>(), 1e-12);
}

TEST(AFactor, RejectsNegative) { EXPECT_THROW(a_factor(-1e-9), ParameterError); }

TEST(Marginal, Values)
{
    EXPECT_EQ(blockage_probability_marginal(scene(0.0, 0.1)), 1.0);
    auto const s = scene(300e-6, 0.0);
    EXPECT_NEAR(blockage_probability_marginal(s),
                bs_count_pmf(0, poisson_mean(s)), 1e-16);
    double const p = blockage_probability_marginal(scene(400e-6, 0.01));
    EXPECT_NEAR(p, 3.6020169817559134e-05, 1e-18);
    EXPECT_NEAR(p, 3.6e-5, 0.05e-5);
}

TEST(Conditional, Values)
{
    EXPECT_EQ(blockage_probability_conditional(scene(300e-6, 0.0)), 0.0);
    EXPECT_THROW(blockage_probability_conditional(scene(0.0, 0.01)),
                 UndefinedQuantity);
    // the 1e-5 target is crossed between 380 and 470 per km^2
    EXPECT_GT(blockage_probability_conditional(scene(380e-6, 0.01)), 1e-5);
    EXPECT_LT(blockage_probability_conditional(scene(470e-6, 0.01)), 1e-5);
    EXPECT_NEAR(blockage_probability_conditional(scene(450e-6, 0.01)),
                2.376982918937635e-06, 1e-18);

    auto const big_density = scene(2e-2, 0.1);
    EXPECT_NEAR(blockage_probability_conditional(big_density)
                    / blockage_probability_marginal(big_density),
                1.0, 1e-12);
}

TEST(Frequency, Values)
{
    EXPECT_EQ(expected_frequency_conditional(scene(300e-6, 0.0)), 0.0);
    EXPECT_THROW(expected_frequency_conditional(scene(0.0, 0.1)),
                 UndefinedQuantity);

    auto const s = scene(100e-6, 0.1);
    double const f = expected_frequency_conditional(s);
    EXPECT_NEAR(f, 0.12564084621390784, 1e-15);
    // sum_n n mu (1-a)^n P_N(n) / P(C)
    double const a = a_factor(100.0 * crossing_coefficient(s) / s.mu);
    double const nu = poisson_mean(s);
    double sum = 0;
    for (int n = 1; n < 80; ++n)
        sum += n * s.mu * std::pow(1 - a, n) * pmf_oracle(n, nu);
    EXPECT_NEAR(f, sum / (1 - pmf_oracle(0, nu)), 1e-14);
}

TEST(Frequency, MarginalPeaksAtInverseA)
{
    auto s = scene(100e-6, 0.1);
    double const a = derive(s).a;
    double const unit = self_blockage_fraction(s.omega) * pi * 1e4;
    auto at = [&](double nu) {
        s.bs_density = nu / unit;
        return expected_frequency_marginal(s);
    };
    double const peak = at(1 / a);
    EXPECT_GT(peak, at(0.99 / a));
    EXPECT_GT(peak, at(1.01 / a));
}

TEST(EiSeries, SmallAndZero)
{
    EXPECT_EQ(ei_series(0.0), 0.0);
    for (double x : {1e-6, 1e-4, 1e-3})
        EXPECT_NEAR(ei_series(x), x + x * x / 4, x * x * x);
    EXPECT_THROW(ei_series(-1.0), ParameterError);
}

TEST(EiSeries, HighPrecisionOracle)
{
    EXPECT_NEAR(ei_series(5.23599), 45.665, 5e-4);
    for (double x : {0.5, 2.618, 5.23599, 7.854, 13.09, 30.0})
        EXPECT_NEAR(ei_series(x) / ei_oracle(x), 1.0, 1e-13) << x;
}

TEST(EiSeries, ScaledFormAgreesAndSurvivesLargeArguments)
{
    for (double x : {0.5, 13.09, 200.0})
        EXPECT_NEAR(ei_series_scaled(x) / (std::exp(-x) * ei_series(x)), 1.0,
                    1e-13);
    // exp(-x) Ei[x] ~ (1/x)(1 + 1/x + 2/x^2 + ...) for large x
    double const x = 2000.0;
    EXPECT_NEAR(ei_series_scaled(x) * x, 1 + 1 / x + 2 / (x * x), 1e-8);
}

TEST(Duration, Values)
{
    auto const s200 = scene(200e-6, 0.1);
    double const d = expected_duration_conditional(s200);
    EXPECT_NEAR(d, 0.12215479199600364, 1e-15);
    EXPECT_NEAR(d, 0.1222, 5e-5);
    EXPECT_NEAR(d, oracle::duration_direct_sum(s200), 1e-13);
    EXPECT_NEAR(expected_duration_conditional(scene(500e-6, 0.1)), 0.0417,
                5e-5);
    EXPECT_THROW(expected_duration_conditional(scene(0, 0.1)),
                 UndefinedQuantity);
}

TEST(Duration, IndependentOfBlockerDensity)
{
    double const ref = expected_duration_conditional(scene(300e-6, 0.01));
    for (double lb : {0.0, 0.05, 0.1, 1.0})
        EXPECT_EQ(expected_duration_conditional(scene(300e-6, lb)), ref);
}

TEST(DurationApprox, BothForms)
{
    EXPECT_NEAR(expected_duration_approx(5.236, 2.0), 0.1137, 5e-5);
    EXPECT_NEAR(expected_duration_approx_in_text(5.236, 2.0), 0.1046, 5e-5);
    EXPECT_NEAR(expected_duration_approx(7.854, 2.0), 0.071767, 5e-6);
    EXPECT_THROW(expected_duration_approx(0.0, 2.0), ParameterError);

    auto s = scene(0, 0.1);
    for (double l : {1e-2, 1e-1})
    {
        s.bs_density = l;
        EXPECT_NEAR(expected_duration_approx(s) / expected_duration_conditional(s),
                    1.0, 1e-4);
    }
}

TEST(Pmf, Values)
{
    double const nu = 5.236;
    EXPECT_DOUBLE_EQ(bs_count_pmf(0, nu), std::exp(-nu));
    EXPECT_NEAR(bs_count_pmf(5, nu), pmf_oracle(5, nu), 1e-15);
    EXPECT_NEAR(bs_count_pmf(5, nu), 0.17452234350222283, 1e-15);
    double sum = 0;
    for (int n = 0; n < 100; ++n)
        sum += bs_count_pmf(n, nu);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    // large n stays finite in log space
    EXPECT_NEAR(bs_count_pmf(1000, 1000.0) / pmf_oracle(1000, 1000.0), 1.0, 1e-12);
    EXPECT_EQ(bs_count_pmf(0, 0.0), 1.0);
    EXPECT_EQ(bs_count_pmf(3, 0.0), 0.0);
    EXPECT_THROW(bs_count_pmf(-1, 1.0), ParameterError);
}

TEST(Analyze, StatsRecord)
{
    auto const st = analyze(scene(200e-6, 0.1));
    EXPECT_NEAR(st.coverage_prob, 0.9946784345211994, 1e-15);
    EXPECT_NEAR(st.blockage_prob_marginal, 0.014161582197439612, 1e-16);
    EXPECT_NEAR(st.blockage_prob_conditional, 0.008887311126730399, 1e-16);
    EXPECT_NEAR(st.expected_freq_conditional, 0.027870042643160987, 1e-16);
    EXPECT_NEAR(st.expected_duration_conditional, 0.12215479199600364, 1e-15);
}

} // namespace
} // namespace mmblock::test
