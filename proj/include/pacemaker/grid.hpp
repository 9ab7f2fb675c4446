#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pacemaker {

// Cell-centred uniform grid on [-L, L]: x_j = -L + (j + 1/2) h, symmetric about 0.
struct Grid {
    double half_width = 60.0;
    std::size_t n_points = 1024;

    Grid() = default;
    Grid(double L, std::size_t n) : half_width(L), n_points(n)
    {
        if (!(L > 0.0) || n < 4 || n % 2 != 0)
            throw ConfigError("grid needs L > 0 and an even number of points >= 4");
    }

    double spacing() const { return 2.0 * half_width / static_cast<double>(n_points); }
    double x(std::size_t j) const { return -half_width + (static_cast<double>(j) + 0.5) * spacing(); }

    std::vector<double> x_samples() const
    {
        std::vector<double> xs(n_points);
        for (std::size_t j = 0; j < n_points; ++j) xs[j] = x(j);
        return xs;
    }

    // Discrete frequencies for period 2L in FFT order.
    std::vector<double> fourier_freqs() const { return freqs_for_period(n_points, 2.0 * half_width); }

    // Frequencies of the zero-padded grid (2n points, period 4L) used for convolutions.
    std::vector<double> padded_freqs() const { return freqs_for_period(2 * n_points, 4.0 * half_width); }

    static std::vector<double> freqs_for_period(std::size_t m, double period)
    {
        std::vector<double> l(m);
        const double base = 2.0 * std::numbers::pi / period;
        for (std::size_t k = 0; k < m; ++k) {
            const long kk = k <= m / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(m);
            l[k] = base * static_cast<double>(kk);
        }
        return l;
    }

    bool operator==(const Grid& o) const { return half_width == o.half_width && n_points == o.n_points; }
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.n_points, 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v))
    {
        if (values.size() != grid.n_points) throw GridMismatchError("sample count does not match grid");
    }

    template <class F>
    static Field from_function(const Grid& g, F&& f)
    {
        Field out(g);
        for (std::size_t j = 0; j < g.n_points; ++j) out.values[j] = f(g.x(j));
        return out;
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    Field& operator+=(const Field& o) { check(o); for (std::size_t j = 0; j < size(); ++j) values[j] += o.values[j]; return *this; }
    Field& operator-=(const Field& o) { check(o); for (std::size_t j = 0; j < size(); ++j) values[j] -= o.values[j]; return *this; }
    Field& operator*=(double c) { for (auto& v : values) v *= c; return *this; }

    void check(const Field& o) const
    {
        if (!(grid == o.grid)) throw GridMismatchError("fields live on different grids");
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline Field operator+(Field a, const Field& b) { a += b; return a; }
inline Field operator-(Field a, const Field& b) { a -= b; return a; }
inline Field operator*(double c, Field a) { a *= c; return a; }
inline Field operator*(const Field& a, const Field& b)
{
    a.check(b);
    Field out(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) out.values[j] = a.values[j] * b.values[j];
    return out;
}

inline void require_same_grid(const Grid& a, const Grid& b)
{
    if (!(a == b)) throw GridMismatchError("grid mismatch");
}

// Analytic building blocks S = tanh and its derivatives.
namespace front {
inline double S(double x) { return std::tanh(x); }
inline double sech2(double x) { const double c = std::cosh(std::min(std::abs(x), 350.0)); return 1.0 / (c * c); }
inline double dS(double x) { return sech2(x); }
inline double ddS(double x) { return -2.0 * sech2(x) * std::tanh(x); }
inline double dddS(double x) { const double s2 = sech2(x), t = std::tanh(x); return -2.0 * s2 * (s2 - 2.0 * t * t); }
inline double xS(double x) { return x * std::tanh(x); }
inline double d_xS(double x) { return std::tanh(x) + x * sech2(x); }
inline double dd_xS(double x) { return 2.0 * sech2(x) - 2.0 * x * sech2(x) * std::tanh(x); }
inline double ddd_xS(double x) { return 3.0 * ddS(x) + x * dddS(x); }
// log cosh x, stable for large |x|
inline double log_cosh(double x) { const double a = std::abs(x); return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2; }
} // namespace front

} // namespace pacemaker
