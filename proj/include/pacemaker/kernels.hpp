#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "spectral.hpp"

namespace pacemaker {

// Natural cubic spline through tabulated (x, value) pairs; zero outside the table.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
    {
        const std::size_t n = x_.size();
        if (n < 4 || y_.size() != n) throw KernelError("table needs at least four (x, value) rows");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw KernelError("table abscissae must be strictly increasing");
        m_.assign(n, 0.0);
        std::vector<double> c(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            const double a = h0, b = 2.0 * (h0 + h1), cc = h1;
            const double r = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
            const double denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m_[i] = d[i] - c[i] * m_[i + 1];
            if (i == 1) break;
        }
    }

    double operator()(double x) const
    {
        if (x_.empty() || x < x_.front() || x > x_.back()) return 0.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.end() ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }

private:
    std::vector<double> x_, y_, m_;
};

enum class KernelFamily { gaussian, sech_sq, table };

struct KernelParams {
    KernelFamily family = KernelFamily::gaussian;
    double width = 1.0; // standard deviation (gaussian) or scale w of sech^2(x/w)
    double mass = 1.0;  // total integral
    std::vector<double> table_x, table_values;
};

inline std::string to_string(KernelFamily f)
{
    switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::sech_sq: return "sech_sq";
    case KernelFamily::table: return "table";
    }
    return "?";
}

struct Symbol {
    std::string tag;
    Grid grid;
    std::vector<cplx> padded;             // samples on grid.padded_freqs()
    std::function<cplx(double)> at;       // evaluation at an arbitrary frequency
};

struct Kernel {
    KernelParams params;
    Grid grid;
    std::function<double(double)> eval;
    Field samples;
    double m0 = 0, m1 = 0, m2 = 0;
    double tail_mass = 0;
    std::vector<double> lattice;          // K(m h) for m = -M..M
    std::size_t lattice_half = 0;         // M
    std::vector<cplx> symbol_padded;      // real and even

    double lattice_z(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(lattice_half)) * grid.spacing(); }

    // h * sum_m K(mh) cos(l m h): the symbol of the discrete convolution.
    double symbol_at(double l) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < lattice.size(); ++i) s += lattice[i] * std::cos(l * lattice_z(i));
        return s * grid.spacing();
    }

    Symbol as_symbol(std::string tag) const
    {
        auto self = std::make_shared<Kernel>(*this);
        return Symbol{std::move(tag), grid, symbol_padded, [self](double l) { return cplx(self->symbol_at(l), 0.0); }};
    }
};

namespace detail {

inline double tail_mass_numeric(const std::function<double(double)>& f, double L, double reach)
{
    // composite Simpson on [L, reach] for |f|, doubled for both sides
    const int m = 4000;
    const double h = (reach - L) / m;
    if (h <= 0) return 0.0;
    double s = std::abs(f(L)) + std::abs(f(reach));
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * std::abs(f(L + i * h));
    double t = std::abs(f(-L)) + std::abs(f(-reach));
    for (int i = 1; i < m; ++i) t += (i % 2 ? 4.0 : 2.0) * std::abs(f(-L - i * h));
    return (s + t) * h / 3.0;
}

} // namespace detail

constexpr double kernel_mass_guard = 1e-12;
constexpr double kernel_evenness_tolerance = 1e-8;

inline Kernel make_kernel(const KernelParams& params, const Grid& grid)
{
    Kernel k;
    k.params = params;
    k.grid = grid;
    const double L = grid.half_width;
    switch (params.family) {
    case KernelFamily::gaussian: {
        const double s = params.width, a = params.mass;
        if (!(s > 0)) throw KernelError("gaussian kernel width must be positive");
        k.eval = [s, a](double x) { return a * std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi)); };
        k.tail_mass = std::abs(a) * std::erfc(L / (s * std::numbers::sqrt2));
        break;
    }
    case KernelFamily::sech_sq: {
        const double w = params.width, a = params.mass;
        if (!(w > 0)) throw KernelError("sech_sq kernel width must be positive");
        k.eval = [w, a](double x) { return a * front::sech2(x / w) / (2.0 * w); };
        k.tail_mass = std::abs(a) * 2.0 / (std::exp(std::min(2.0 * L / w, 700.0)) + 1.0);
        break;
    }
    case KernelFamily::table: {
        auto spline = std::make_shared<CubicSpline>(params.table_x, params.table_values);
        const double a = params.mass;
        k.eval = [spline, a](double x) { return a * (*spline)(x); };
        const double reach = std::max(std::abs(spline->xs().front()), std::abs(spline->xs().back()));
        k.tail_mass = reach > L ? detail::tail_mass_numeric(k.eval, L, reach) : 0.0;
        break;
    }
    }
    if (!(k.tail_mass < kernel_mass_guard)) {
        std::ostringstream os;
        os << "kernel mass outside [-L, L] is " << k.tail_mass << ", above " << kernel_mass_guard << "; enlarge the domain";
        throw KernelError(os.str());
    }

    k.samples = Field::from_function(grid, k.eval);
    const std::size_t n = grid.n_points;
    double peak = 0.0, odd = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        peak = std::max(peak, std::abs(k.samples[j]));
        odd = std::max(odd, std::abs(k.samples[j] - k.samples[n - 1 - j]));
    }
    if (odd > kernel_evenness_tolerance * std::max(peak, 1e-300))
        throw KernelError("kernel is not even: max |K(x) - K(-x)| = " + std::to_string(odd));

    const double h = grid.spacing();
    for (std::size_t j = 0; j < n; ++j) {
        const double x = grid.x(j), v = k.samples[j];
        k.m0 += v;
        k.m1 += x * v;
        k.m2 += x * x * v;
    }
    k.m0 *= h;
    k.m1 *= h;
    k.m2 *= h;

    // Lattice values K(mh), |m| <= n/2, trimmed where the kernel is negligible.
    std::size_t M = n / 2;
    const double k0 = std::abs(k.eval(0.0));
    while (M > 1 && std::abs(k.eval(static_cast<double>(M) * h)) < 1e-22 * std::max(k0, 1e-300)
           && std::abs(k.eval(static_cast<double>(M - 1) * h)) < 1e-22 * std::max(k0, 1e-300))
        --M;
    k.lattice_half = M;
    k.lattice.resize(2 * M + 1);
    for (std::size_t i = 0; i <= 2 * M; ++i) k.lattice[i] = k.eval(k.lattice_z(i));
    for (std::size_t i = 0; i < M; ++i) {
        const double e = 0.5 * (k.lattice[i] + k.lattice[2 * M - i]);
        k.lattice[i] = k.lattice[2 * M - i] = e;
    }

    std::vector<cplx> buf(2 * n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i <= 2 * M; ++i) {
        const long m = static_cast<long>(i) - static_cast<long>(M);
        buf[static_cast<std::size_t>((m + static_cast<long>(2 * n)) % static_cast<long>(2 * n))] = k.lattice[i] * h;
    }
    FftEngine::instance().forward(buf);
    k.symbol_padded.resize(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) k.symbol_padded[i] = cplx(buf[i].real(), 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double e = 0.5 * (buf[i].real() + buf[2 * n - i].real());
        k.symbol_padded[i] = k.symbol_padded[2 * n - i] = cplx(e, 0.0);
    }
    return k;
}

inline Kernel make_gaussian_kernel(const Grid& g, double std_dev = 1.0, double mass = 1.0)
{
    return make_kernel(KernelParams{KernelFamily::gaussian, std_dev, mass, {}, {}}, g);
}

// (K * F)(x_i) = h sum_m K(mh) F(x_i - mh) for an analytic, possibly unbounded F.
template <class F>
Field convolve_analytic(const Kernel& k, F&& func, const Grid& g)
{
    require_same_grid(k.grid, g);
    const double h = g.spacing();
    Field out(g);
    for (std::size_t j = 0; j < g.n_points; ++j) {
        const double x = g.x(j);
        double s = 0.0;
        for (std::size_t i = 0; i < k.lattice.size(); ++i) s += k.lattice[i] * func(x - k.lattice_z(i));
        out.values[j] = s * h;
    }
    return out;
}

// -------------------------------------------------------------------------
// Inhomogeneity g

enum class InhomogeneityFamily { gaussian, algebraic, table };

struct InhomogeneityParams {
    InhomogeneityFamily family = InhomogeneityFamily::gaussian;
    double amplitude = -1.0;
    double width = 1.0;
    double center = 0.0;
    double decay = 4.0;  // exponent of (1 + (x/w)^2)^(-decay) for the algebraic family
    double sigma = 2.5;  // localization exponent
    std::vector<double> table_x, table_values;
};

struct Inhomogeneity {
    InhomogeneityParams params;
    Grid grid;
    std::function<double(double)> eval;
    Field samples;
    double sigma = 2.5;
    double g0 = 0, g1 = 0, abs_mass = 0;
    double weighted_norms[3] = {0, 0, 0};   // int (d^j g)^2 (1+x^2)^(sigma+4)
    bool weighted_stable = false;
};

namespace detail {

inline std::function<double(double)> inhomogeneity_function(const InhomogeneityParams& p)
{
    switch (p.family) {
    case InhomogeneityFamily::gaussian: {
        if (!(p.width > 0)) throw ConfigError("inhomogeneity width must be positive");
        return [a = p.amplitude, w = p.width, c = p.center](double x) { const double z = (x - c) / w; return a * std::exp(-z * z); };
    }
    case InhomogeneityFamily::algebraic: {
        if (!(p.width > 0)) throw ConfigError("inhomogeneity width must be positive");
        return [a = p.amplitude, w = p.width, c = p.center, d = p.decay](double x) {
            const double z = (x - c) / w;
            return a * std::pow(1.0 + z * z, -d);
        };
    }
    case InhomogeneityFamily::table: {
        auto spline = std::make_shared<CubicSpline>(p.table_x, p.table_values);
        return [spline, a = p.amplitude](double x) { return a * (*spline)(x); };
    }
    }
    throw ConfigError("unknown inhomogeneity family");
}

inline void weighted_derivative_norms(const std::function<double(double)>& g, const Grid& grid, double sigma, double out[3])
{
    Field f = Field::from_function(grid, g);
    const double h = grid.spacing();
    for (int j = 0; j < 3; ++j) {
        const Field d = derivative_localized(f, j);
        double s = 0.0;
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            const double x = grid.x(i);
            s += d[i] * d[i] * std::pow(1.0 + x * x, sigma + 4.0);
        }
        out[j] = s * h;
    }
}

} // namespace detail

inline Inhomogeneity make_inhomogeneity(const InhomogeneityParams& params, const Grid& grid)
{
    Inhomogeneity g;
    g.params = params;
    g.grid = grid;
    g.sigma = params.sigma;
    g.eval = detail::inhomogeneity_function(params);
    g.samples = Field::from_function(grid, g.eval);
    const double h = grid.spacing();
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j), v = g.samples[j];
        g.g0 += v;
        g.g1 += x * v;
        g.abs_mass += std::abs(v);
    }
    g.g0 *= h;
    g.g1 *= h;
    g.abs_mass *= h;

    // Finite and stable under refinement of h and under doubling of the domain.
    detail::weighted_derivative_norms(g.eval, grid, g.sigma, g.weighted_norms);
    double fine[3], wide[3];
    detail::weighted_derivative_norms(g.eval, Grid(grid.half_width, 2 * grid.n_points), g.sigma, fine);
    detail::weighted_derivative_norms(g.eval, Grid(2 * grid.half_width, 2 * grid.n_points), g.sigma, wide);
    g.weighted_stable = true;
    for (int j = 0; j < 3; ++j) {
        const double ref = std::max(g.weighted_norms[j], 1e-300);
        if (!std::isfinite(g.weighted_norms[j]) || std::abs(fine[j] - g.weighted_norms[j]) > 1e-3 * ref
            || std::abs(wide[j] - g.weighted_norms[j]) > 1e-3 * ref)
            g.weighted_stable = false;
    }
    return g;
}

inline Inhomogeneity make_gaussian_inhomogeneity(const Grid& grid, double amplitude = -1.0, double width = 1.0, double center = 0.0)
{
    InhomogeneityParams p;
    p.amplitude = amplitude;
    p.width = width;
    p.center = center;
    return make_inhomogeneity(p, grid);
}

// -------------------------------------------------------------------------
// Hypotheses

struct HypothesisReport {
    bool h1 = false, h2 = false, h3 = false;
    std::string h1_failure, h2_failure, h3_failure;
    double G2 = 0, J0 = 0, g0 = 0, g1 = 0, sigma = 0;
    double max_symbol_G = 0;

    bool all() const { return h1 && h2 && h3; }
};

inline HypothesisReport validate_hypotheses(const Kernel& G, const Kernel& J, const Inhomogeneity& g)
{
    require_same_grid(G.grid, J.grid);
    require_same_grid(G.grid, g.grid);
    HypothesisReport r;
    r.G2 = G.m2;
    r.J0 = J.m0;
    r.g0 = g.g0;
    r.g1 = g.g1;
    r.sigma = g.sigma;
    r.max_symbol_G = -1e300;
    for (const auto& v : G.symbol_padded) r.max_symbol_G = std::max(r.max_symbol_G, v.real());

    std::ostringstream h1;
    if (std::abs(G.m0 - 1.0) > 1e-8) h1 << "G mass m0 = " << G.m0 << " != 1; ";
    if (r.max_symbol_G > 1.0 + 1e-12) h1 << "symbol of G exceeds 1 (max " << r.max_symbol_G << "); ";
    if (!(G.m2 > 0)) h1 << "G2 = " << G.m2 << " is not positive; ";
    r.h1_failure = h1.str();
    r.h1 = r.h1_failure.empty();

    if (!(std::abs(J.m0) > 1e-12)) r.h2_failure = "J0 = 0";
    r.h2 = r.h2_failure.empty();

    std::ostringstream h3;
    if (!(g.sigma > 2.0)) h3 << "sigma = " << g.sigma << " is not > 2; ";
    if (!(std::abs(g.g0) > 1e-8 * std::max(g.abs_mass, 1e-300))) h3 << "g0 = 0; ";
    if (!g.weighted_stable) h3 << "weighted norms of g, g', g'' not finite/stable; ";
    r.h3_failure = h3.str();
    r.h3 = r.h3_failure.empty();
    return r;
}

// -------------------------------------------------------------------------
// Convolution and derived symbols

inline Field convolve(const Symbol& s, const Field& f)
{
    require_same_grid(s.grid, f.grid);
    return apply_multiplier(f, s.padded);
}

// Periodic application (period 2L) for data that does not decay, e.g. constants and cosines.
inline Field convolve_periodic(const Symbol& s, const Field& f)
{
    require_same_grid(s.grid, f.grid);
    return apply_multiplier_periodic(f, s.at);
}

inline Field convolve(const Kernel& k, const Field& f)
{
    require_same_grid(k.grid, f.grid);
    return apply_multiplier(f, k.symbol_padded);
}

struct DerivedSymbols {
    Symbol G_minus_I, G_b, G_m1, G_m2, J_prime, J2, D, inv_one_minus_dx;
    double G2 = 0;  // second moment consistent with the lattice symbol
    double J0 = 0;
    double c0 = 0;  // value of the G_{-1} symbol at 0, equal to 2/G2
};

inline DerivedSymbols derived_symbols(const Kernel& G, const Kernel& J)
{
    require_same_grid(G.grid, J.grid);
    const Grid grid = G.grid;
    const auto freqs = grid.padded_freqs();
    const std::size_t m = freqs.size();
    const double h = grid.spacing();

    DerivedSymbols d;
    for (std::size_t i = 0; i < G.lattice.size(); ++i) d.G2 += G.lattice[i] * G.lattice_z(i) * G.lattice_z(i);
    d.G2 *= h;
    d.J0 = J.symbol_padded[0].real();
    if (!(d.G2 > 0)) throw InvertibilityError("G2 must be positive for the G_b factorization");
    d.c0 = 2.0 / d.G2;

    auto Gs = std::make_shared<Kernel>(G);
    auto Js = std::make_shared<Kernel>(J);
    const double G2 = d.G2, J0 = d.J0, c0 = d.c0;
    const cplx I(0.0, 1.0);

    auto gb_from = [G2](double l, double ghat) { return std::abs(l) < 1e-7 ? G2 / 2.0 : (1.0 - ghat) / (l * l); };
    auto gm2_from = [c0, I](double l, double gm1) { return std::abs(l) < 1e-7 ? cplx(0.0) : (1.0 - I * l) * (gm1 - c0) / (I * l); };
    auto j2_from = [J0, I](double l, double jhat) { return std::abs(l) < 1e-7 ? cplx(0.0) : (1.0 - I * l) * (jhat - J0) / (I * l); };

    auto make = [&](std::string tag, std::function<cplx(double, std::size_t)> padded_value, std::function<cplx(double)> at) {
        Symbol s{std::move(tag), grid, std::vector<cplx>(m), std::move(at)};
        for (std::size_t k = 0; k < m; ++k) s.padded[k] = padded_value(freqs[k], k);
        s.padded[m / 2] = cplx(s.padded[m / 2].real(), 0.0);
        return s;
    };
    const auto& gp = G.symbol_padded;
    const auto& jp = J.symbol_padded;

    double gb_min = 1e300;
    for (std::size_t k = 0; k < m; ++k) gb_min = std::min(gb_min, gb_from(freqs[k], gp[k].real()));
    if (!(gb_min > 1e-10 * G2 / 2.0))
        throw InvertibilityError("symbol G_b vanishes (min " + std::to_string(gb_min) + "); G_{-1} is undefined");

    d.G_minus_I = make("G-I", [&](double, std::size_t k) { return cplx(gp[k].real() - 1.0); },
                       [Gs](double l) { return cplx(Gs->symbol_at(l) - 1.0); });
    d.G_b = make("G_b", [&](double l, std::size_t k) { return cplx(gb_from(l, gp[k].real())); },
                 [Gs, gb_from](double l) { return cplx(gb_from(l, Gs->symbol_at(l))); });
    d.G_m1 = make("G_-1", [&](double l, std::size_t k) { return cplx(1.0 / gb_from(l, gp[k].real())); },
                  [Gs, gb_from](double l) { return cplx(1.0 / gb_from(l, Gs->symbol_at(l))); });
    d.G_m2 = make("G_-2", [&](double l, std::size_t k) { return gm2_from(l, 1.0 / gb_from(l, gp[k].real())); },
                  [Gs, gb_from, gm2_from](double l) { return gm2_from(l, 1.0 / gb_from(l, Gs->symbol_at(l))); });
    d.J_prime = make("J'", [&](double l, std::size_t k) { return I * l * jp[k].real(); },
                     [Js, I](double l) { return I * l * Js->symbol_at(l); });
    d.J2 = make("J2", [&](double l, std::size_t k) { return j2_from(l, jp[k].real()); },
                [Js, j2_from](double l) { return j2_from(l, Js->symbol_at(l)); });
    auto dsym = [I](double l) { return I * l / (1.0 - I * l); };
    auto inv = [I](double l) { return 1.0 / (1.0 - I * l); };
    d.D = make("D", [&](double l, std::size_t) { return dsym(l); }, dsym);
    d.inv_one_minus_dx = make("inv(1-dx)", [&](double l, std::size_t) { return inv(l); }, inv);
    return d;
}

inline Field apply_D(const Field& f)
{
    const cplx I(0.0, 1.0);
    return apply_multiplier(f, sample_multiplier(f.grid.padded_freqs(), [I](double l) { return I * l / (1.0 - I * l); }));
}

inline Field apply_inv_one_minus_dx(const Field& f)
{
    const cplx I(0.0, 1.0);
    return apply_multiplier(f, sample_multiplier(f.grid.padded_freqs(), [I](double l) { return 1.0 / (1.0 - I * l); }));
}

} // namespace pacemaker
