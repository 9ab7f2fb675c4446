#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pacemaker/kernels.hpp"

using namespace pacemaker;

namespace {

const Grid grid(30.0, 512);

double bump(double x) { return std::abs(x) < 3.0 ? std::exp(-1.0 / (1.0 - x * x / 9.0)) : 0.0; }

} // namespace

TEST(Kernel, GaussianMoments)
{
    const Kernel G = make_gaussian_kernel(grid);
    EXPECT_NEAR(G.m0, 1.0, 1e-12);
    EXPECT_NEAR(G.m1, 0.0, 1e-12);
    EXPECT_NEAR(G.m2, 1.0, 1e-12);
}

TEST(Kernel, GaussianSymbolBoundedByOne)
{
    const Kernel G = make_gaussian_kernel(grid);
    EXPECT_NEAR(G.symbol_padded[0].real(), 1.0, 1e-13);
    for (const auto& v : G.symbol_padded) {
        EXPECT_LE(v.real(), 1.0 + 1e-14);
        EXPECT_EQ(v.imag(), 0.0);
    }
}

TEST(Kernel, SymbolMatchesClosedFormGaussian)
{
    const Kernel G = make_gaussian_kernel(grid, 1.5);
    const auto freqs = grid.padded_freqs();
    for (std::size_t k = 0; k < 200; k += 7) {
        const double l = freqs[k];
        EXPECT_NEAR(G.symbol_padded[k].real(), std::exp(-0.5 * 2.25 * l * l), 1e-12);
        EXPECT_NEAR(G.symbol_at(l), std::exp(-0.5 * 2.25 * l * l), 1e-12);
    }
}

TEST(Kernel, SechSquaredMoments)
{
    const Kernel G = make_kernel({KernelFamily::sech_sq, 1.0, 1.0, {}, {}}, grid);
    EXPECT_NEAR(G.m0, 1.0, 1e-12);
    EXPECT_NEAR(G.m2, std::numbers::pi * std::numbers::pi / 12.0, 1e-10);
    const double l = 0.7, z = std::numbers::pi * l / 2.0;
    EXPECT_NEAR(G.symbol_at(l), z / std::sinh(z), 1e-10);
}

TEST(Kernel, OddTableRejected)
{
    KernelParams p;
    p.family = KernelFamily::table;
    for (int i = -100; i <= 100; ++i) {
        const double x = 0.1 * i;
        p.table_x.push_back(x);
        p.table_values.push_back(std::exp(-x * x) + 0.01 * x * std::exp(-x * x));
    }
    EXPECT_THROW(make_kernel(p, grid), KernelError);
}

TEST(Kernel, EvenTableAccepted)
{
    KernelParams p;
    p.family = KernelFamily::table;
    for (int i = -200; i <= 200; ++i) {
        const double x = 0.05 * i;
        p.table_x.push_back(x);
        p.table_values.push_back(std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi));
    }
    const Kernel k = make_kernel(p, grid);
    EXPECT_NEAR(k.m0, 1.0, 1e-6);
    EXPECT_NEAR(k.m2, 1.0, 1e-5);
}

TEST(Kernel, MassTruncationGuard)
{
    EXPECT_THROW(make_gaussian_kernel(Grid(10.0, 128), 3.0), KernelError);
    EXPECT_THROW(make_gaussian_kernel(grid, -1.0), KernelError);
}

TEST(Hypotheses, DefaultSetupPasses)
{
    const Kernel G = make_gaussian_kernel(grid), J = make_gaussian_kernel(grid);
    const Inhomogeneity g = make_gaussian_inhomogeneity(grid);
    const HypothesisReport r = validate_hypotheses(G, J, g);
    EXPECT_TRUE(r.h1) << r.h1_failure;
    EXPECT_TRUE(r.h2) << r.h2_failure;
    EXPECT_TRUE(r.h3) << r.h3_failure;
    EXPECT_NEAR(r.g0, -std::sqrt(std::numbers::pi), 1e-10);
    EXPECT_NEAR(r.g1, 0.0, 1e-12);
    EXPECT_NEAR(r.G2, 1.0, 1e-12);
    EXPECT_NEAR(r.J0, 1.0, 1e-12);
}

TEST(Hypotheses, OddInhomogeneityFailsH3)
{
    const Kernel G = make_gaussian_kernel(grid);
    InhomogeneityParams p;
    p.family = InhomogeneityFamily::table;
    p.amplitude = 1.0;
    for (int i = -600; i <= 600; ++i) {
        const double x = 0.02 * i;
        p.table_x.push_back(x);
        p.table_values.push_back(x * std::exp(-x * x));
    }
    const Inhomogeneity g = make_inhomogeneity(p, grid);
    const HypothesisReport r = validate_hypotheses(G, G, g);
    EXPECT_FALSE(r.h3);
    EXPECT_NE(r.h3_failure.find("g0 = 0"), std::string::npos);
}

TEST(Hypotheses, SymbolAboveOneFailsH1)
{
    // 2 N(0, 1/2^2) - N(0, 1): unit mass, negative second moment, symbol > 1 near 0
    KernelParams p;
    p.family = KernelFamily::table;
    for (int i = -400; i <= 400; ++i) {
        const double x = 0.025 * i;
        const double a = 2.0 * std::exp(-2.0 * x * x) / std::sqrt(0.5 * std::numbers::pi);
        const double b = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        p.table_x.push_back(x);
        p.table_values.push_back(a - b);
    }
    const Kernel G = make_kernel(p, grid);
    const Kernel J = make_gaussian_kernel(grid);
    const HypothesisReport r = validate_hypotheses(G, J, make_gaussian_inhomogeneity(grid));
    EXPECT_FALSE(r.h1);
    EXPECT_GT(r.max_symbol_G, 1.0);
}

TEST(Hypotheses, AlgebraicInhomogeneityTooSlowFailsH3)
{
    InhomogeneityParams p;
    p.family = InhomogeneityFamily::algebraic;
    p.decay = 1.0; // g ~ x^-2, so g^2 (1+x^2)^(sigma+4) is not integrable
    const Inhomogeneity g = make_inhomogeneity(p, grid);
    EXPECT_FALSE(g.weighted_stable);
}

TEST(Convolve, ConstantsAndDerivativeKernel)
{
    const Kernel G = make_gaussian_kernel(grid), J = make_gaussian_kernel(grid);
    const DerivedSymbols d = derived_symbols(G, J);
    const Field one = Field::from_function(grid, [](double) { return 1.0; });
    const Field a = convolve_periodic(G.as_symbol("G"), one);
    const Field b = convolve_periodic(d.J_prime, one);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        EXPECT_NEAR(a[i], 1.0, 1e-12);
        EXPECT_NEAR(b[i], 0.0, 1e-12);
    }
}

TEST(Convolve, CosineEigenfunction)
{
    const Kernel G = make_gaussian_kernel(grid);
    const double l0 = 2.0 * std::numbers::pi * 7.0 / (2.0 * grid.half_width);
    const Field c = Field::from_function(grid, [l0](double x) { return std::cos(l0 * x); });
    const Field out = convolve_periodic(G.as_symbol("G"), c);
    for (std::size_t i = 0; i < grid.n_points; ++i)
        EXPECT_NEAR(out[i], std::exp(-0.5 * l0 * l0) * c[i], 1e-12);
}

TEST(Convolve, LocalizedMatchesDirectQuadrature)
{
    const Kernel G = make_gaussian_kernel(grid, 0.8);
    const Field f = Field::from_function(grid, [](double x) { return std::exp(-x * x / 4.0) * (1.0 + x); });
    const Field spectral = convolve(G, f);
    const Field direct = convolve_analytic(G, [](double x) { return std::exp(-x * x / 4.0) * (1.0 + x); }, grid);
    for (std::size_t i = 0; i < grid.n_points; ++i) EXPECT_NEAR(spectral[i], direct[i], 1e-12);
}

TEST(Convolve, GridMismatch)
{
    const Kernel G = make_gaussian_kernel(grid);
    EXPECT_THROW(convolve(G, Field(Grid(30.0, 256))), GridMismatchError);
}

TEST(Convolve, NonHermitianSymbolDetected)
{
    const Kernel G = make_gaussian_kernel(grid);
    Symbol s = G.as_symbol("bad");
    for (auto& v : s.padded) v *= cplx(0.0, 1.0);
    const Field f = Field::from_function(grid, [](double x) { return std::exp(-x * x); });
    EXPECT_THROW(convolve(s, f), SymbolParityError);
}

TEST(Convolve, MassConservationOfLinearFlow)
{
    const Kernel G = make_gaussian_kernel(grid, 1.3);
    const Field f = Field::from_function(grid, [](double x) { return bump(x - 1.0) + 0.3 * std::exp(-x * x); });
    const Field flow = convolve(G, f) - f;
    double s = 0.0;
    for (double v : flow.values) s += v;
    EXPECT_NEAR(s * grid.spacing(), 0.0, 1e-13);
}

TEST(DerivedSymbols, LimitsAtZero)
{
    const Kernel G = make_gaussian_kernel(grid), J = make_gaussian_kernel(grid);
    const DerivedSymbols d = derived_symbols(G, J);
    EXPECT_NEAR(d.G_b.padded[0].real(), 0.5, 1e-12);
    EXPECT_NEAR(d.G_m1.padded[0].real(), 2.0, 1e-11);
    EXPECT_EQ(std::abs(d.J2.padded[0]), 0.0);
    EXPECT_EQ(std::abs(d.D.padded[0]), 0.0);
    EXPECT_NEAR(std::abs(d.D.at(1e6)), 1.0, 1e-6);
    EXPECT_NEAR(d.G_b.at(0.0).real(), 0.5, 1e-12);
    EXPECT_NEAR(d.G_b.at(1e-3).real(), 0.5, 1e-6);
}

TEST(DerivedSymbols, FactorizationIdentities)
{
    const Kernel G = make_gaussian_kernel(grid, 1.2), J = make_gaussian_kernel(grid, 0.7, 1.3);
    const DerivedSymbols d = derived_symbols(G, J);
    const auto freqs = grid.padded_freqs();
    const std::size_t m = freqs.size();
    for (std::size_t k = 0; k < m; ++k) {
        if (k == m / 2) continue;
        const double l = freqs[k];
        EXPECT_NEAR(G.symbol_padded[k].real() - 1.0, -l * l * d.G_b.padded[k].real(), 1e-12);
        const cplx lhs = J.symbol_padded[k].real() - d.J0;
        EXPECT_NEAR(std::abs(lhs - d.D.padded[k] * d.J2.padded[k]), 0.0, 1e-12);
        const cplx lhs2 = d.G_m1.padded[k] - d.c0;
        EXPECT_NEAR(std::abs(lhs2 - d.D.padded[k] * d.G_m2.padded[k]), 0.0, 1e-9 * std::max(1.0, std::abs(lhs2)));
    }
}

TEST(DerivedSymbols, ParityOfSymbols)
{
    const Kernel G = make_gaussian_kernel(grid), J = make_gaussian_kernel(grid);
    const DerivedSymbols d = derived_symbols(G, J);
    const std::size_t m = d.J_prime.padded.size();
    for (std::size_t k = 1; k < m / 2; ++k) {
        EXPECT_EQ(d.J_prime.padded[k].real(), 0.0);
        EXPECT_EQ(d.J_prime.padded[k], -d.J_prime.padded[m - k]);
        EXPECT_EQ(d.G_b.padded[k], d.G_b.padded[m - k]);
        EXPECT_EQ(d.G_m1.padded[k].imag(), 0.0);
        EXPECT_EQ(d.D.padded[k], std::conj(d.D.padded[m - k]));
    }
}

TEST(DerivedSymbols, RoundTripGm1Gb)
{
    const Kernel G = make_gaussian_kernel(grid), J = make_gaussian_kernel(grid);
    const DerivedSymbols d = derived_symbols(G, J);
    const Field f = Field::from_function(grid, [](double x) { return bump(x) * (1.0 + 0.5 * x); });
    const Field back = convolve(d.G_m1, convolve(d.G_b, f));
    double err = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) err = std::max(err, std::abs(back[i] - f[i]));
    EXPECT_LT(err, 1e-8 * f.max_abs());
}

TEST(DerivedSymbols, VanishingGbRejected)
{
    // A kernel whose symbol reaches 1 at nonzero frequency: mass 1 split into two far spikes.
    const Grid g(30.0, 512);
    KernelParams p;
    p.family = KernelFamily::table;
    for (int i = -800; i <= 800; ++i) {
        const double x = 0.01 * i;
        const double s = 0.05;
        const double v = 0.5 * (std::exp(-0.5 * (x - 5) * (x - 5) / (s * s)) + std::exp(-0.5 * (x + 5) * (x + 5) / (s * s)))
                         / (s * std::sqrt(2 * std::numbers::pi));
        p.table_x.push_back(x);
        p.table_values.push_back(v);
    }
    const Kernel G = make_kernel(p, g);
    const Kernel J = make_gaussian_kernel(g);
    // symbol cos(5 l) exp(-s^2 l^2/2) is close to 1 at l = 2 pi / 5 but stays below it
    EXPECT_NO_THROW(derived_symbols(G, J));
    Kernel Gbad = G;
    for (auto& v : Gbad.symbol_padded) v = 1.0;
    EXPECT_THROW(derived_symbols(Gbad, J), InvertibilityError);
}

TEST(ApplyD, ConstantAndQuadratureOracle)
{
    const Field c = Field::from_function(grid, [](double) { return 1.0; });
    const Field dc = apply_multiplier_periodic(c, [](double l) { return cplx(0, l) / (1.0 - cplx(0, l)); });
    for (double v : dc.values) EXPECT_NEAR(v, 0.0, 1e-13);

    // D = d_x (1 - d_x)^{-1}; (1 - d_x)^{-1} f = int_x^inf e^{x - y} f(y) dy
    const Field f = Field::from_function(grid, [](double x) { return std::exp(-x * x); });
    const Field df = apply_D(f);
    for (double x0 : {-2.0, -0.5, 0.3, 1.7}) {
        const auto inv = [](double x) {
            double s = 0.0;
            const int m = 20000;
            const double h = 12.0 / m;
            for (int i = 0; i < m; ++i) {
                const double y = x + (i + 0.5) * h;
                s += std::exp(x - y) * std::exp(-y * y);
            }
            return s * h;
        };
        // D f = (1 - d_x)^{-1} f - f
        const double oracle = inv(x0) - std::exp(-x0 * x0);
        std::size_t j = 0;
        double best = 1e9;
        for (std::size_t i = 0; i < grid.n_points; ++i)
            if (std::abs(grid.x(i) - x0) < best) { best = std::abs(grid.x(i) - x0); j = i; }
        const double xj = grid.x(j);
        EXPECT_NEAR(df[j], inv(xj) - std::exp(-xj * xj), 1e-7) << "near x = " << x0 << " oracle " << oracle;
    }
}

TEST(ApplyD, InverseRoundTrip)
{
    const Field f = Field::from_function(grid, [](double x) { return std::exp(-x * x) * std::sin(2 * x); });
    const Field g = apply_inv_one_minus_dx(f);
    const Field back = g - derivative_localized(g, 1);
    for (std::size_t i = 0; i < grid.n_points; ++i) EXPECT_NEAR(back[i], f[i], 1e-12);
}
