#pragma once

#include <cmath>
#include <stdexcept>

#include "spectral.hpp"

namespace pacemaker {

// Least-squares affine fit offset + slope * x over one side of the domain.
struct SideFit {
    double offset = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
    double window_lo = 0.0; // |x| range used
    double window_hi = 0.0;
};

inline SideFit fit_side(const Field& f, bool right, double lo_frac, double hi_frac)
{
    const double L = f.grid.half_width;
    const double lo = lo_frac * L, hi = hi_frac * L;
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = f.grid.x(j);
        const double ax = std::abs(x);
        if ((x > 0) != right || ax < lo || ax > hi) continue;
        s0 += 1; s1 += x; s2 += x * x;
        t0 += f.values[j]; t1 += x * f.values[j];
    }
    if (s0 < 2) throw std::invalid_argument("far-field window contains fewer than two samples");
    const double det = s0 * s2 - s1 * s1;
    SideFit fit;
    fit.slope = (s0 * t1 - s1 * t0) / det;
    fit.offset = (t0 - fit.slope * s1) / s0;
    fit.window_lo = lo;
    fit.window_hi = hi;
    double r2 = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = f.grid.x(j);
        const double ax = std::abs(x);
        if ((x > 0) != right || ax < lo || ax > hi) continue;
        const double r = f.values[j] - fit.offset - fit.slope * x;
        r2 += r * r;
    }
    fit.rms_residual = std::sqrt(r2 / s0);
    return fit;
}

// A(x) = oc + od S + kc x + kd x S, equal to o+ + k+ x for x >> 1 and o- + k- x for x << -1.
struct AffineFarField {
    double oc = 0.0, od = 0.0, kc = 0.0, kd = 0.0;

    static AffineFarField from_sides(double o_plus, double k_plus, double o_minus, double k_minus)
    {
        return {0.5 * (o_plus + o_minus), 0.5 * (o_plus - o_minus), 0.5 * (k_plus + k_minus), 0.5 * (k_plus - k_minus)};
    }

    double value(double x) const { return oc + od * front::S(x) + kc * x + kd * front::xS(x); }

    double derivative(double x, int order) const
    {
        switch (order) {
        case 0: return value(x);
        case 1: return od * front::dS(x) + kc + kd * front::d_xS(x);
        case 2: return od * front::ddS(x) + kd * front::dd_xS(x);
        case 3: return od * front::dddS(x) + kd * front::ddd_xS(x);
        default: throw std::invalid_argument("far-field derivatives available up to order 3");
        }
    }

    Field sample(const Grid& g, int order = 0) const
    {
        return Field::from_function(g, [&](double x) { return derivative(x, order); });
    }
};

inline AffineFarField fit_affine(const Field& f, double window_fraction = 0.1)
{
    const SideFit p = fit_side(f, true, 1.0 - window_fraction, 1.0);
    const SideFit m = fit_side(f, false, 1.0 - window_fraction, 1.0);
    return AffineFarField::from_sides(p.offset, p.slope, m.offset, m.slope);
}

// Spectral derivative after removing the fitted affine far field, whose
// derivatives are added back analytically.
inline Field derivative(const Field& f, int order, double window_fraction = 0.1)
{
    if (order == 0) return f;
    const AffineFarField a = fit_affine(f, window_fraction);
    Field r = f - a.sample(f.grid);
    Field out = derivative_localized(r, order);
    out += a.sample(f.grid, order);
    return out;
}

} // namespace pacemaker
