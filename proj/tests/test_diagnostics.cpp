#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pacemaker/diagnostics.hpp"

using namespace pacemaker;

namespace {

const Grid grid(60.0, 1024);

double gauss_well(double x) { return -std::exp(-x * x); }

} // namespace

TEST(FarField, GlobalAffine)
{
    const Field phi = Field::from_function(grid, [](double x) { return 0.3 * x + 1.0; });
    const FarFieldFit f = fit_far_field(phi);
    EXPECT_NEAR(f.k_plus, 0.3, 1e-12);
    EXPECT_NEAR(f.k_minus, 0.3, 1e-12);
    EXPECT_NEAR(f.offset_plus, 1.0, 1e-10);
    EXPECT_NEAR(f.offset_minus, 1.0, 1e-10);
    EXPECT_TRUE(f.locked);
}

TEST(FarField, TanhProfile)
{
    const Field phi = Field::from_function(grid, [](double x) { return (0.2 * x + 0.5) * std::tanh(x); });
    const FarFieldFit f = fit_far_field(phi, 0.5);
    EXPECT_NEAR(f.window_lo, 30.0, 1e-12);
    EXPECT_NEAR(f.window_hi, 58.8, 1e-12);
    EXPECT_NEAR(f.k_plus, 0.2, 1e-6);
    EXPECT_NEAR(f.k_minus, -0.2, 1e-6);
    EXPECT_NEAR(f.offset_plus, 0.5, 1e-6);
    EXPECT_NEAR(f.offset_minus, -0.5, 1e-6);
    EXPECT_NEAR(f.c_g_plus, 0.4, 1e-6);
}

TEST(FarField, CurvedProfileWarns)
{
    const Field phi = Field::from_function(grid, [](double x) { return 0.01 * x * x; });
    const FarFieldFit f = fit_far_field(phi);
    EXPECT_FALSE(f.locked);
    EXPECT_FALSE(f.warning.empty());
}

TEST(FarField, ConvergedLocalAnsatz)
{
    const Problem p(Model::local, make_gaussian_inhomogeneity(grid));
    const auto an = correct(p, 0.05, leading_order(p)).second;
    const FarFieldFit f = fit_far_field(an.assembled());
    EXPECT_NEAR(f.k_plus, 0.05 * std::sqrt(std::numbers::pi) / 2, 0.05 * 0.0443);
    EXPECT_NEAR(f.k_plus, an.k, 1e-8);
    EXPECT_NEAR(f.k_minus, -an.k, 1e-8);
}

TEST(Oracle, NonnegativePotentialHasNoBoundState)
{
    OracleOptions opt;
    opt.max_half_width = 400.0;
    const OracleResult r = cole_hopf_oracle(gauss_well, -0.1, opt);
    EXPECT_FALSE(r.bound);
    EXPECT_EQ(r.omega, 0.0);
    EXPECT_FALSE(r.warning.empty());
}

TEST(Oracle, DeeperPoschlTeller)
{
    // -6 sech^2 x has ground state E = -4
    const OracleResult r = cole_hopf_oracle([](double x) { return -6.0 / std::pow(std::cosh(x), 2); }, 1.0);
    EXPECT_NEAR(r.E0, -4.0, 1e-5);
    EXPECT_NEAR(r.decay_rate, 2.0, 1e-5);
}

TEST(Oracle, PoschlTellerExact)
{
    // -2 sech^2 x has the single bound state E = -1, u = sech x / sqrt 2
    const OracleResult r = cole_hopf_oracle([](double x) { return -2.0 / std::pow(std::cosh(x), 2); }, 1.0);
    EXPECT_NEAR(r.E0, -1.0, 1e-6);
    EXPECT_NEAR(r.decay_rate, 1.0, 1e-6);
    const std::size_t mid = r.x.size() / 2;
    EXPECT_NEAR(r.eigenfunction[mid], 1.0 / std::cosh(r.x[mid]) / std::sqrt(2.0), 1e-3);
    double s = 0.0;
    for (double v : r.eigenfunction) s += v * v;
    EXPECT_NEAR(s * (r.x[1] - r.x[0]), 1.0, 1e-12);
}

TEST(Oracle, MatchesLocalCorrector)
{
    const Problem p(Model::local, make_gaussian_inhomogeneity(grid));
    const LeadingOrder lo = leading_order(p);
    for (double eps : {0.05, 0.1, 0.2}) {
        const OracleResult r = cole_hopf_oracle(p.g, eps);
        const auto an = correct(p, eps, lo).second;
        EXPECT_NEAR(r.omega, an.omega, 1e-4 * r.omega) << eps;
        EXPECT_LT(std::exp(-r.decay_rate * r.half_width), 1e-8);
    }
}

TEST(Oracle, SmallPotentialAsymptotic)
{
    // E0 = -(eps g0 / 2)^2 + O(eps^3)
    const double g0 = -std::sqrt(std::numbers::pi);
    const double e1 = 0.01, e2 = 0.005;
    const double d1 = cole_hopf_oracle(gauss_well, e1).E0 + std::pow(e1 * g0 / 2, 2);
    const double d2 = cole_hopf_oracle(gauss_well, e2).E0 + std::pow(e2 * g0 / 2, 2);
    EXPECT_LT(std::abs(d1), 0.05 * std::pow(e1 * g0 / 2, 2));
    EXPECT_NEAR(d1 / d2, 8.0, 0.8);
}

TEST(Oracle, QuadraticScaling)
{
    const double r = cole_hopf_oracle(gauss_well, 0.05).omega / cole_hopf_oracle(gauss_well, 0.025).omega;
    EXPECT_NEAR(r, 4.0, 0.4);
}

TEST(SteadyResidual, ExactWaveTrain)
{
    const auto K = KernelSet::make(make_gaussian_kernel(grid), make_gaussian_kernel(grid));
    const Problem p(Model::nonlocal, make_gaussian_inhomogeneity(grid), K);
    const Field phi = Field::from_function(grid, [](double x) { return 0.2 * x; });
    EXPECT_LT(steady_residual(p, 0.0, phi, 0.04, NormSpec::lp(0.0)), 1e-8);
    const Problem q(Model::local, make_gaussian_inhomogeneity(grid));
    EXPECT_LT(steady_residual(q, 0.0, phi, 0.04, NormSpec::lp(0.0)), 1e-8);
}

TEST(SteadyResidual, LeadingOrderVersusCorrected)
{
    const Problem p(Model::local, make_gaussian_inhomogeneity(grid));
    const LeadingOrder lo = leading_order(p);
    const double eps = 0.05;
    const NormSpec spec = NormSpec::lp(4.5);
    const double lead = steady_residual(p, leading_order_ansatz(p, eps, lo), spec);
    const auto an = correct(p, eps, lo).second;
    EXPECT_LT(lead, 10 * eps * eps);
    EXPECT_LT(steady_residual(p, an, spec), 1e-6);
}

TEST(SteadyResidual, SimulatedStateMatchesAnsatz)
{
    const Problem p(Model::local, make_gaussian_inhomogeneity(grid));
    const auto an = correct(p, 0.1, leading_order(p)).second;
    SimState s;
    s.phi = an.assembled();
    EXPECT_LT(steady_residual(p, 0.1, s, an.omega, NormSpec::lp(0.0)), 1e-6);
}

TEST(Fits, LineAndLogLog)
{
    const LineFit f = least_squares_line({1, 2, 3}, {3, 5, 7});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(loglog_slope({0.1, 0.2, 0.4}, {0.01, 0.04, 0.16}), 2.0, 1e-12);
    EXPECT_NEAR(quadratic_through_origin_slope({0.1, 0.2, 0.4}, {0.1 * 0.9 + 0.01 * 0.3, 0.2 * 0.9 + 0.04 * 0.3, 0.4 * 0.9 + 0.16 * 0.3}), 0.9, 1e-12);
    EXPECT_NEAR(theil_sen_slope({0, 1, 2, 3, 4}, {0, 2, 4, 100, 8}), 2.0, 1e-12);
}
