#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "simulator.hpp"

namespace pacemaker {

struct FarFieldFit {
    double k_plus = 0, k_minus = 0;
    double offset_plus = 0, offset_minus = 0;
    double residual_plus = 0, residual_minus = 0; // rms of the affine fit per side
    double window_lo = 0, window_hi = 0;          // |x| range
    double c_g_plus = 0, c_g_minus = 0;
    bool locked = true;
    std::string warning;
};

// Per-side affine fit on |x| in [window_fraction L, 0.98 L]; the outer 2% holds closure artifacts.
inline FarFieldFit fit_far_field(const Field& phi, double window_fraction = 0.5, double kappa = 1.0)
{
    if (!(window_fraction >= 0.0 && window_fraction < 0.97)) throw ConfigError("far-field window fraction must lie in [0, 0.97)");
    const SideFit p = fit_side(phi, true, window_fraction, 0.98);
    const SideFit m = fit_side(phi, false, window_fraction, 0.98);
    FarFieldFit f;
    f.k_plus = p.slope;
    f.k_minus = m.slope;
    f.offset_plus = p.offset;
    f.offset_minus = m.offset;
    f.residual_plus = p.rms_residual;
    f.residual_minus = m.rms_residual;
    f.window_lo = p.window_lo;
    f.window_hi = p.window_hi;
    f.c_g_plus = 2.0 * kappa * f.k_plus;
    f.c_g_minus = 2.0 * kappa * f.k_minus;
    const auto ok = [](double res, double k) { return res <= 1e-3 * std::max(std::abs(k), 1e-9); };
    f.locked = ok(f.residual_plus, f.k_plus) && ok(f.residual_minus, f.k_minus);
    if (!f.locked) {
        std::ostringstream os;
        os << "far field not locked: fit residuals " << f.residual_plus << ", " << f.residual_minus << " exceed 1e-3 |k|";
        f.warning = os.str();
    }
    return f;
}

struct OracleOptions {
    double h = 0.05;            // finest spacing; the estimate is extrapolated from h and 2h
    double initial_half_width = 40.0;
    double max_half_width = 5.0e4;
    double decay_target = 1e-8; // exp(-sqrt|E0| L) at the wall
};

struct OracleResult {
    double E0 = 0.0;
    double omega = 0.0;
    double decay_rate = 0.0;    // sqrt(-E0)
    bool bound = false;
    double half_width = 0.0;
    std::vector<double> x, eigenfunction; // L^2-normalized, on the finest grid
    std::string warning;
};

namespace detail {

// Number of eigenvalues below E of the Dirichlet matrix -D2 + V (Sturm sequence of the LDL^T pivots).
inline std::size_t sturm_count(const std::vector<double>& V, double h, double E)
{
    const double off2 = 1.0 / (h * h * h * h), d0 = 2.0 / (h * h);
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        q = d0 + V[i] - E - (i == 0 ? 0.0 : off2 / q);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

inline double lowest_eigenvalue(const std::vector<double>& V, double h)
{
    double lo = *std::min_element(V.begin(), V.end()), hi = 0.0;
    if (sturm_count(V, h, hi) == 0) return std::nan("");
    for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(std::abs(lo), 1e-300); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sturm_count(V, h, mid) >= 1 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// Inverse iteration with the Thomas algorithm.
inline std::vector<double> ground_state(const std::vector<double>& V, double h, double E)
{
    const std::size_t n = V.size();
    const double off = -1.0 / (h * h), shift = E - 1e-10 * std::max(std::abs(E), 1e-12);
    std::vector<double> u(n, 1.0), c(n), d(n);
    for (int it = 0; it < 4; ++it) {
        double beta = 2.0 / (h * h) + V[0] - shift;
        d[0] = u[0] / beta;
        for (std::size_t i = 1; i < n; ++i) {
            c[i] = off / beta;
            beta = 2.0 / (h * h) + V[i] - shift - off * c[i];
            d[i] = (u[i] - off * d[i - 1]) / beta;
        }
        u[n - 1] = d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) u[i] = d[i] - c[i + 1] * u[i + 1];
        double s = 0.0;
        for (double v : u) s += v * v;
        s = std::sqrt(s * h);
        for (double& v : u) v /= s;
    }
    if (u[n / 2] < 0) for (double& v : u) v = -v;
    return u;
}

} // namespace detail

// Ground state of -u'' + eps g u = E u with Dirichlet walls at +-L, L doubled until the bound
// state has decayed below the target, second-order differences extrapolated in h.
// The local pacemaker frequency is omega = -E0 (phi = -log u after the Cole-Hopf substitution).
inline OracleResult cole_hopf_oracle(const std::function<double(double)>& g, double eps, const OracleOptions& opt = {})
{
    if (!(opt.h > 0.0) || !(opt.initial_half_width > 0.0)) throw ConfigError("oracle spacing and width must be positive");
    auto solve = [&](double L, double h) {
        const std::size_t n = static_cast<std::size_t>(std::llround(2.0 * L / h)) - 1;
        std::vector<double> V(n);
        for (std::size_t i = 0; i < n; ++i) V[i] = eps * g(-L + static_cast<double>(i + 1) * h);
        return std::pair{detail::lowest_eigenvalue(V, h), V};
    };
    OracleResult r;
    double L = opt.initial_half_width;
    for (;;) {
        const double e_coarse = solve(L, 2.0 * opt.h).first;
        const auto [e_fine, V] = solve(L, opt.h);
        if (std::isnan(e_fine) || std::isnan(e_coarse)) {
            if (2.0 * L > opt.max_half_width) {
                r.warning = "no negative eigenvalue: no bound state on the available domain";
                if (eps != 0.0) r.warning += " (well too shallow for the grid, or eps g >= 0)";
                r.half_width = L;
                return r;
            }
            L *= 2.0;
            continue;
        }
        const double E = (4.0 * e_fine - e_coarse) / 3.0;
        const double kappa = std::sqrt(std::max(-E, 0.0));
        if (std::exp(-kappa * L) > opt.decay_target && 2.0 * L <= opt.max_half_width) {
            L *= 2.0;
            continue;
        }
        r.E0 = E;
        r.bound = E < 0.0;
        r.omega = r.bound ? -E : 0.0;
        r.decay_rate = kappa;
        r.half_width = L;
        if (std::exp(-kappa * L) > opt.decay_target) r.warning = "domain cap reached before the bound state decayed";
        r.eigenfunction = detail::ground_state(V, opt.h, e_fine);
        r.x.resize(V.size());
        for (std::size_t i = 0; i < V.size(); ++i) r.x[i] = -L + static_cast<double>(i + 1) * opt.h;
        return r;
    }
}

inline OracleResult cole_hopf_oracle(const Inhomogeneity& g, double eps, const OracleOptions& opt = {})
{
    return cole_hopf_oracle(g.eval, eps, opt);
}

// || rhs(Phi) + omega || in the requested norm, with the affine far field handled analytically.
inline double steady_residual(const Problem& p, double eps, const AffineFarField& a, const Field& r, double omega,
                              const NormSpec& spec)
{
    const Evolution ev(p, eps);
    Field res = ev.rhs(a, r);
    for (auto& v : res.values) v += omega;
    return norm(res, spec);
}

inline double steady_residual(const Problem& p, const PacemakerAnsatz& an, const NormSpec& spec)
{
    return steady_residual(p, an.epsilon, an.far_field(), an.phi_core, an.omega, spec);
}

inline double steady_residual(const Problem& p, double eps, const Field& phi, double omega, const NormSpec& spec)
{
    const AffineFarField a = fit_affine(phi);
    return steady_residual(p, eps, a, phi - a.sample(phi.grid), omega, spec);
}

inline double steady_residual(const Problem& p, double eps, const SimState& s, double omega, const NormSpec& spec)
{
    return steady_residual(p, eps, s.phi, omega, spec);
}

struct LineFit {
    double slope = 0, intercept = 0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (x.size() < 2 || det == 0.0) throw std::invalid_argument("line fit needs two distinct abscissae");
    return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

// Slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(std::abs(x[i])));
        ly.push_back(std::log(std::abs(y[i])));
    }
    return least_squares_line(lx, ly).slope;
}

// k(eps) = s eps + q eps^2 by least squares; s estimates k'(0).
inline double quadratic_through_origin_slope(const std::vector<double>& eps, const std::vector<double>& k)
{
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double e = eps[i], e2 = e * e;
        a11 += e2; a12 += e * e2; a22 += e2 * e2; b1 += e * k[i]; b2 += e2 * k[i];
    }
    const double det = a11 * a22 - a12 * a12;
    if (eps.size() < 2 || det == 0.0) throw std::invalid_argument("quadratic fit needs two distinct nonzero abscissae");
    return (a22 * b1 - a12 * b2) / det;
}

} // namespace pacemaker
