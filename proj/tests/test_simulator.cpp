#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pacemaker/asymptotics.hpp"
#include "pacemaker/simulator.hpp"

using namespace pacemaker;

namespace {

std::shared_ptr<const KernelSet> kernels(const Grid& g)
{
    return KernelSet::make(make_gaussian_kernel(g), make_gaussian_kernel(g));
}

SimConfig config(Model m, const Grid& g, double eps, double dt, double t_end)
{
    SimConfig c;
    c.problem = Problem(m, make_gaussian_inhomogeneity(g), kernels(g));
    c.epsilon = eps;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

Field bump(const Grid& g, double shift = 0.0)
{
    return Field::from_function(g, [&](double x) { return shift + 0.4 * std::exp(-x * x / 2) * (1 + 0.5 * std::sin(2 * x)); });
}

double integral(const Field& f)
{
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.spacing();
}

} // namespace

TEST(Simulator, ZeroIsFixedPoint)
{
    const Grid g(30.0, 256);
    for (Model m : {Model::local, Model::nonlocal}) {
        const RunResult r = run(config(m, g, 0.0, 0.1, 20.0));
        EXPECT_EQ(r.state.phi.max_abs(), 0.0) << to_string(m);
        EXPECT_EQ(r.omega, 0.0);
    }
}

TEST(Simulator, WaveTrainFrequency)
{
    const Grid g(30.0, 256);
    for (Model m : {Model::local, Model::nonlocal}) {
        SimConfig c = config(m, g, 0.0, 0.05, 50.0);
        c.initial = InitialKind::wavetrain;
        c.initial_k = 0.2;
        c.closure = Closure::wavetrain;
        const RunResult r = run(c);
        EXPECT_NEAR(r.omega, 0.04, 0.04 * 0.01) << to_string(m);
        EXPECT_TRUE(r.locked);
        const double drift = r.state.phi[g.n_points / 2] - 0.2 * g.x(g.n_points / 2);
        EXPECT_NEAR(drift, -0.04 * 50.0, 1e-9);
    }
}

TEST(Simulator, LinearFlowConservesMass)
{
    const Grid g(60.0, 512);
    SimConfig c = config(Model::nonlocal, g, 0.0, 0.05, 50.0);
    c.nonlinear = false;
    c.initial = InitialKind::custom;
    c.initial_field = bump(g);
    Simulator sim(c);
    SimState s = sim.initial_state();
    const double m0 = integral(s.phi);
    for (int i = 0; i < 1000; ++i) sim.step(s);
    EXPECT_NEAR(integral(s.phi), m0, 1e-8);
    EXPECT_LT(s.phi.max_abs(), bump(g).max_abs());
}

TEST(Simulator, LinearFlowIsNonExpanding)
{
    const Grid g(30.0, 256);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (Model m : {Model::local, Model::nonlocal}) {
        double a[3];
        for (double& v : a) v = nd(rng);
        SimConfig c = config(m, g, 0.0, 0.05, 10.0);
        c.nonlinear = false;
        c.initial = InitialKind::custom;
        c.initial_field = Field::from_function(g, [&](double x) {
            return std::exp(-x * x / 8) * (a[0] + a[1] * std::cos(3 * x) + a[2] * std::sin(0.7 * x));
        });
        Simulator sim(c);
        SimState s = sim.initial_state();
        double prev = norm(s.phi, NormSpec::lp(0.0));
        for (int i = 0; i < 200; ++i) {
            sim.step(s);
            const double cur = norm(s.phi, NormSpec::lp(0.0));
            EXPECT_LE(cur, prev * (1 + 1e-12)) << to_string(m) << " step " << i;
            prev = cur;
        }
    }
}

TEST(Simulator, GaugeInvariance)
{
    const Grid g(30.0, 256);
    for (Model m : {Model::local, Model::nonlocal}) {
        SimConfig c = config(m, g, 0.1, 0.1, 20.0);
        c.initial = InitialKind::custom;
        c.initial_field = bump(g);
        const Field base = run(c).state.phi;
        c.initial_field = bump(g, 3.25);
        const Field shifted = run(c).state.phi;
        double worst = 0.0;
        for (std::size_t j = 0; j < g.n_points; ++j) worst = std::max(worst, std::abs(shifted[j] - base[j] - 3.25));
        EXPECT_LT(worst, 1e-10) << to_string(m);
    }
}

TEST(Simulator, TimeStepRefinement)
{
    const Grid g(40.0, 256);
    for (Model m : {Model::local, Model::nonlocal}) {
        const double eps = 0.2, t_end = m == Model::local ? 600.0 : 300.0;
        const RunResult coarse = run(config(m, g, eps, 0.2, t_end));
        const RunResult fine = run(config(m, g, eps, 0.1, t_end));
        EXPECT_TRUE(fine.locked) << to_string(m);
        EXPECT_LT(std::abs(coarse.omega - fine.omega), 0.002 * fine.omega) << to_string(m);
    }
}

TEST(Simulator, OutwardSlopesForValidSign)
{
    const Grid g(40.0, 256);
    const RunResult r = run(config(Model::local, g, 0.2, 0.2, 600.0));
    EXPECT_GT(r.k_plus, 0.0);
    EXPECT_LT(r.k_minus, 0.0);
    EXPECT_FALSE(r.state.frozen[0] || r.state.frozen[1]);
}

TEST(Simulator, WrongSignFormsNoSource)
{
    const Grid g(30.0, 256);
    for (Model m : {Model::local, Model::nonlocal}) {
        const RunResult r = run(config(m, g, -0.1, 0.1, 2000.0));
        EXPECT_LT(std::abs(r.omega), 1e-5) << to_string(m);
        EXPECT_TRUE(r.state.frozen[0] && r.state.frozen[1]);
        EXPECT_LT(r.k_plus, 0.0);
    }
}

TEST(Simulator, AnsatzIsSelfConsistent)
{
    const Grid g(60.0, 512);
    for (Model m : {Model::local, Model::nonlocal}) {
        SimConfig c = config(m, g, 0.1, 0.05, 50.0);
        const auto an = correct(c.problem, 0.1, leading_order(c.problem)).second;
        c.initial = InitialKind::ansatz;
        c.initial_field = an.assembled();
        Simulator sim(c);
        SimState s = sim.initial_state();
        const Field phi0 = an.assembled();
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            sim.step(s);
            for (std::size_t j = 0; j < g.n_points; ++j) worst = std::max(worst, std::abs(s.phi[j] + an.omega * s.t - phi0[j]));
        }
        EXPECT_LT(worst, 1e-3) << to_string(m);
    }
}

TEST(Simulator, SeriesSampling)
{
    const Grid g(30.0, 256);
    SimConfig c = config(Model::local, g, 0.1, 0.1, 10.0);
    c.output_interval = 2.0;
    const RunResult r = run(c);
    ASSERT_EQ(r.series.size(), 6u);
    EXPECT_NEAR(r.series.back().t, 10.0, 1e-12);
    EXPECT_EQ(r.series.front().omega_estimate, 0.0);
}

TEST(Simulator, ConfigErrors)
{
    const Grid g(30.0, 256);
    SimConfig c = config(Model::local, g, 0.1, 0.0, 10.0);
    EXPECT_THROW(Simulator{c}, ConfigError);
    c.dt = 0.1;
    c.initial = InitialKind::custom;
    EXPECT_THROW(Simulator(c).initial_state(), ConfigError);
    c.initial = InitialKind::wavetrain;
    c.initial_k = 50.0;
    EXPECT_THROW(Simulator(c).initial_state(), ConfigError);
    const Grid odd(30.0, 258);
    EXPECT_THROW(Simulator(config(Model::local, odd, 0.1, 0.1, 1.0)), ConfigError);
}

TEST(Simulator, BlowupReportsLastStableTime)
{
    const Grid g(30.0, 256);
    SimConfig c = config(Model::local, g, 1e4, 0.1, 100.0);
    try {
        run(c);
        FAIL() << "expected BlowupError";
    } catch (const BlowupError& e) {
        EXPECT_GE(e.last_stable_time, 0.0);
        EXPECT_LT(e.last_stable_time, 100.0);
    }
}
