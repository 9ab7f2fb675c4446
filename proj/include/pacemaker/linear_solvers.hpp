#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include "weighted_norms.hpp"

namespace pacemaker {

namespace detail {

// Sixth-order panel rule: integral over [x_i, x_{i+1}] from samples i-2 .. i+3.
constexpr double panel_weights[6] = {11.0 / 1440, -93.0 / 1440, 802.0 / 1440, 802.0 / 1440, -93.0 / 1440, 11.0 / 1440};

constexpr double gl_nodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr double gl_weights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

inline std::size_t refinement_factor(double h)
{
    std::size_t m = 2;
    while (h / static_cast<double>(m) > 0.03) m += 2;
    return m;
}

// Samples on the refined padded line x_i = x0 + i * dx.
struct FineLine {
    std::vector<double> values;
    double x0 = 0, dx = 0;
    std::size_t factor = 1, origin = 0; // origin: index of x = 0

    double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
};

inline FineLine refine(const Field& f)
{
    FineLine line;
    line.factor = refinement_factor(f.grid.spacing());
    line.values = upsample_padded(f, line.factor);
    line.dx = f.grid.spacing() / static_cast<double>(line.factor);
    line.x0 = -2.0 * f.grid.half_width + 0.5 * f.grid.spacing();
    line.origin = f.size() * line.factor - line.factor / 2;
    return line;
}

inline Field coarsen(const std::vector<double>& fine, const FineLine& line, const Grid& g)
{
    Field out(g);
    for (std::size_t j = 0; j < g.n_points; ++j) out.values[j] = fine[(j + g.n_points / 2) * line.factor];
    return out;
}

// Integral of q(y) * exp(-2b (lc(y) - lc(x_ref))) over panel [x_i, x_{i+1}].
inline double weighted_panel(const std::vector<double>& q, const std::vector<double>& lc, long i, long ref, double b, double dx)
{
    const long n = static_cast<long>(q.size());
    double s = 0.0;
    for (int k = 0; k < 6; ++k) {
        const long m = i - 2 + k;
        if (m < 0 || m >= n) continue;
        const double w = b == 0.0 ? 1.0 : std::exp(-2.0 * b * (lc[static_cast<std::size_t>(m)] - lc[static_cast<std::size_t>(ref)]));
        s += panel_weights[k] * q[static_cast<std::size_t>(m)] * w;
    }
    return s * dx;
}

struct MarchResult {
    std::vector<double> u, v;
    double jump_u = 0, jump_v = 0;
};

// Solves v' - 2b tanh(x) v = f, u' = v with decay at both ends, marching inward
// from +-infinity and meeting at x = 0. Weights use log cosh differences only.
inline MarchResult march_Lb(const FineLine& line, double b)
{
    const auto& f = line.values;
    const std::size_t N = f.size(), i0 = line.origin;
    std::vector<double> lc(N);
    for (std::size_t i = 0; i < N; ++i) lc[i] = front::log_cosh(line.x(i));
    const double dx = line.dx;

    MarchResult r;
    r.v.assign(N, 0.0);
    r.u.assign(N, 0.0);
    std::vector<double> vl(i0 + 1, 0.0);
    for (std::size_t i = 1; i <= i0; ++i) {
        const double decay = b == 0.0 ? 1.0 : std::exp(-2.0 * b * (lc[i - 1] - lc[i]));
        vl[i] = decay * vl[i - 1] + weighted_panel(f, lc, static_cast<long>(i) - 1, static_cast<long>(i), b, dx);
    }
    for (std::size_t i = N - 1; i-- > i0;) {
        const double decay = b == 0.0 ? 1.0 : std::exp(-2.0 * b * (lc[i + 1] - lc[i]));
        r.v[i] = decay * r.v[i + 1] - weighted_panel(f, lc, static_cast<long>(i), static_cast<long>(i), b, dx);
    }
    r.jump_v = r.v[i0] - vl[i0];
    for (std::size_t i = 0; i < i0; ++i) r.v[i] = vl[i];

    std::vector<double> ul(i0 + 1, 0.0);
    for (std::size_t i = 1; i <= i0; ++i) ul[i] = ul[i - 1] + weighted_panel(r.v, lc, static_cast<long>(i) - 1, 0, 0.0, dx);
    for (std::size_t i = N - 1; i-- > i0;) r.u[i] = r.u[i + 1] - weighted_panel(r.v, lc, static_cast<long>(i), 0, 0.0, dx);
    r.jump_u = r.u[i0] - ul[i0];
    for (std::size_t i = 0; i < i0; ++i) r.u[i] = ul[i];
    return r;
}

inline Field e1_field(const Grid& g) { return Field::from_function(g, front::ddS); }
inline Field e2_field(const Grid& g) { return Field::from_function(g, front::dd_xS); }

inline double abs_pairing(const Field& f, const Field& g)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] * g[i]);
    return s * f.grid.spacing();
}

} // namespace detail

// -------------------------------------------------------------------------
// Antiderivatives on weighted lines

enum class AntiderivativeMode { supercritical, subcritical };

constexpr double critical_weight_band = 1e-3;

inline Field antiderivative_weighted(const Field& f, double gamma, double p, AntiderivativeMode mode)
{
    const double critical = 1.0 - 1.0 / p;
    if (std::abs(gamma - critical) < critical_weight_band) {
        std::ostringstream os;
        os << "weight gamma = " << gamma << " is within " << critical_weight_band << " of the critical value " << critical
           << "; d/dx does not have closed range there";
        throw IllPosedError(os.str());
    }
    if (mode == AntiderivativeMode::supercritical && gamma < critical)
        throw std::invalid_argument("supercritical mode needs gamma > 1 - 1/p");
    if (mode == AntiderivativeMode::subcritical && gamma > critical)
        throw std::invalid_argument("subcritical mode needs gamma < 1 - 1/p");

    const double h = f.grid.spacing();
    double mass = 0.0, abs_mass = 0.0;
    for (double v : f.values) { mass += v; abs_mass += std::abs(v); }
    mass *= h;
    abs_mass *= h;
    if (mode == AntiderivativeMode::supercritical && std::abs(mass) > 1e-8 * std::max(abs_mass, 1e-300))
        throw SolvabilityError("integral of f is " + std::to_string(mass) + "; supercritical antiderivative needs zero mean", {mass});

    const detail::FineLine line = detail::refine(f);
    const auto& q = line.values;
    const std::size_t N = q.size(), i0 = line.origin;
    std::vector<double> u(N, 0.0);
    if (mode == AntiderivativeMode::supercritical) {
        for (std::size_t i = 1; i <= i0; ++i) u[i] = u[i - 1] + detail::weighted_panel(q, q, static_cast<long>(i) - 1, 0, 0.0, line.dx);
        std::vector<double> ur(N, 0.0);
        for (std::size_t i = N - 1; i-- > i0;) ur[i] = ur[i + 1] - detail::weighted_panel(q, q, static_cast<long>(i), 0, 0.0, line.dx);
        for (std::size_t i = i0; i < N; ++i) u[i] = ur[i];
    } else {
        for (std::size_t i = i0 + 1; i < N; ++i) u[i] = u[i - 1] + detail::weighted_panel(q, q, static_cast<long>(i) - 1, 0, 0.0, line.dx);
        for (std::size_t i = i0; i-- > 0;) u[i] = u[i + 1] - detail::weighted_panel(q, q, static_cast<long>(i), 0, 0.0, line.dx);
    }
    return detail::coarsen(u, line, f.grid);
}

// Norm of u = -int_x^inf f from L^2_gamma to L^2_{gamma-1}, restricted to odd f
// (which have zero mean, so u is the decaying antiderivative). Odd f reduce the
// problem to the half line; it is discretized on a geometric grid x = e^tau - 1
// reaching e^tau_max, with all weights handled in log form.
inline double antiderivative_operator_norm(double gamma, double tau_max, double dtau = 0.05, int iterations = 400)
{
    const double critical = 0.5;
    if (!(gamma > critical + critical_weight_band)) throw IllPosedError("operator norm requested at or below the critical weight");
    const std::size_t N = static_cast<std::size_t>(tau_max / dtau);
    // Cell c = [x_c, x_{c+1}], x = e^tau - 1; log of cell width and of the Japanese bracket.
    std::vector<double> log_w_f(N), log_w_u(N);
    auto log_bracket = [](double tau) {
        // 0.5 log(1 + x^2), x = e^tau - 1
        const double x = std::expm1(tau);
        if (tau < 30) return 0.5 * std::log1p(x * x);
        return tau + 0.5 * std::log1p(2.0 * std::exp(-2.0 * tau) - 2.0 * std::exp(-tau));
    };
    for (std::size_t c = 0; c < N; ++c) {
        const double tm = (static_cast<double>(c) + 0.5) * dtau;
        const double log_dx = tm + std::log(2.0 * std::sinh(0.5 * dtau));
        const double lb = log_bracket(tm);
        // f_c = g_c / (w_gamma sqrt(dx)); contributes f_c dx to u
        log_w_f[c] = 0.5 * log_dx - gamma * lb;
        // u sampled at cell midpoints, quadrature weight sqrt(dx) <x>^{gamma-1}
        log_w_u[c] = 0.5 * log_dx + (gamma - 1.0) * lb;
    }
    // A g: y_i = a_i * (sum_{c > i} b_c g_c + b_i g_i / 2), a = exp(log_w_u), b = exp(log_w_f)
    auto apply = [&](const std::vector<double>& g, std::vector<double>& y) {
        double acc = 0.0; // holds a_i * sum_{c>i} b_c g_c
        for (std::size_t i = N; i-- > 0;) {
            const double half = 0.5 * std::exp(log_w_u[i] + log_w_f[i]) * g[i];
            y[i] = acc + half;
            if (i > 0) acc = std::exp(log_w_u[i - 1] - log_w_u[i]) * (acc + 2.0 * half);
        }
    };
    auto apply_t = [&](const std::vector<double>& y, std::vector<double>& g) {
        double acc = 0.0; // holds b_c * sum_{i<c} a_i y_i
        for (std::size_t c = 0; c < N; ++c) {
            const double half = 0.5 * std::exp(log_w_u[c] + log_w_f[c]) * y[c];
            g[c] = acc + half;
            if (c + 1 < N) acc = std::exp(log_w_f[c + 1] - log_w_f[c]) * (acc + 2.0 * half);
        }
    };
    std::vector<double> g(N, 1.0), y(N), g2(N);
    double sigma = 0.0;
    for (int it = 0; it < iterations; ++it) {
        double ng = 0.0;
        for (double v : g) ng += v * v;
        ng = std::sqrt(ng);
        for (double& v : g) v /= ng;
        apply(g, y);
        double ny = 0.0;
        for (double v : y) ny += v * v;
        sigma = std::sqrt(ny);
        apply_t(y, g2);
        g.swap(g2);
    }
    return sigma;
}

// -------------------------------------------------------------------------
// Bordered Laplacian

struct LaplaceSolution {
    Field phi;
    double a = 0, b = 0;
    double residual = 0;
};

inline LaplaceSolution laplace_bordered(const Field& f)
{
    const Grid& g = f.grid;
    const Field one = Field::from_function(g, [](double) { return 1.0; });
    const Field xf = Field::from_function(g, [](double x) { return x; });
    const Field e1 = detail::e1_field(g), e2 = detail::e2_field(g);
    LaplaceSolution s;
    s.b = pairing(f, one) / 2.0;
    s.a = -pairing(f, xf) / 2.0;
    Field r = f - s.a * e1 - s.b * e2;
    const double m0 = pairing(r, one), m1 = pairing(r, xf);
    const double s0 = detail::abs_pairing(f, one) + 1e-300, s1 = detail::abs_pairing(f, xf) + 1e-300;
    if (std::abs(m0) > 1e-8 * s0 || std::abs(m1) > 1e-8 * s1)
        throw SolvabilityError("projected remainder keeps nonzero moments; bordering is inconsistent", {m0, m1});
    const detail::FineLine line = detail::refine(r);
    const detail::MarchResult m = detail::march_Lb(line, 0.0);
    s.phi = detail::coarsen(m.u, line, g);
    const Field lhs = derivative(s.phi, 2) + s.a * e1 + s.b * e2;
    s.residual = norm(lhs - f, NormSpec::lp(2.0)) / std::max(norm(f, NormSpec::lp(2.0)), 1e-300);
    return s;
}

// -------------------------------------------------------------------------
// Cokernel of L_b and the bordering projection

struct CokernelPair {
    double b = 0;
    Grid grid;
    Field psi1_star, psi2_star;
    Field e1, e2;           // bordering elements d_xx S and d_xx (x S)
    Field psi1, psi2;       // dual basis inside span{e1, e2}
    std::array<std::array<double, 2>, 2> gram{}; // gram[j][k] = <e_k, psi_j*>
    std::array<std::array<double, 2>, 2> dual{}; // psi_i = sum_k dual[i][k] e_k
    double condition = 1;

    std::array<double, 2> defects(const Field& f) const { return {pairing(f, psi1_star), pairing(f, psi2_star)}; }

    // (alpha, beta) with <f - alpha e1 - beta e2, psi_j*> = 0.
    std::array<double, 2> coefficients(const Field& f) const
    {
        const auto d = defects(f);
        return {dual[0][0] * d[0] + dual[1][0] * d[1], dual[0][1] * d[0] + dual[1][1] * d[1]};
    }

    Field project(const Field& u) const
    {
        const auto d = defects(u);
        return u - d[0] * psi1 - d[1] * psi2;
    }
};

constexpr double gram_condition_limit = 1e8;

inline CokernelPair cokernel(double b, const Grid& grid)
{
    if (!(b >= 0.0)) throw std::domain_error("cokernel needs b >= 0");
    CokernelPair c;
    c.b = b;
    c.grid = grid;
    c.psi1_star = Field::from_function(grid, [b](double x) { return std::exp(-2.0 * b * front::log_cosh(x)); });
    c.psi2_star = Field(grid);
    const std::size_t n = grid.n_points;
    double prev_x = 0.0, prev = 0.0;
    for (std::size_t j = n / 2; j < n; ++j) {
        const double x = grid.x(j), lx = front::log_cosh(x);
        double panel = 0.0;
        const double mid = 0.5 * (x + prev_x), half = 0.5 * (x - prev_x);
        for (int q = 0; q < 8; ++q) {
            const double y = mid + half * detail::gl_nodes[q];
            panel += detail::gl_weights[q] * std::exp(-2.0 * b * (lx - front::log_cosh(y)));
        }
        const double val = std::exp(-2.0 * b * (lx - front::log_cosh(prev_x))) * prev + panel * half;
        c.psi2_star[j] = val;
        c.psi2_star[n - 1 - j] = -val;
        prev = val;
        prev_x = x;
    }
    c.e1 = detail::e1_field(grid);
    c.e2 = detail::e2_field(grid);
    const Field* stars[2] = {&c.psi1_star, &c.psi2_star};
    const Field* es[2] = {&c.e1, &c.e2};
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) c.gram[j][k] = pairing(*es[k], *stars[j]);
    const auto& M = c.gram;
    const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    const double fro2 = M[0][0] * M[0][0] + M[0][1] * M[0][1] + M[1][0] * M[1][0] + M[1][1] * M[1][1];
    const double disc = std::sqrt(std::max(fro2 * fro2 - 4.0 * det * det, 0.0));
    const double smax = std::sqrt(0.5 * (fro2 + disc)), smin2 = 0.5 * (fro2 - disc);
    c.condition = smin2 > 0 ? smax / std::sqrt(smin2) : INFINITY;
    if (!(c.condition < gram_condition_limit)) {
        std::ostringstream os;
        os << "Gram matrix of the bordering is degenerate (condition " << c.condition << ")";
        throw DegenerateBorderingError(os.str());
    }
    // dual = M^{-T}
    const std::array<std::array<double, 2>, 2> inv{{{M[1][1] / det, -M[0][1] / det}, {-M[1][0] / det, M[0][0] / det}}};
    c.dual = {{{inv[0][0], inv[1][0]}, {inv[0][1], inv[1][1]}}};
    c.psi1 = c.dual[0][0] * c.e1 + c.dual[0][1] * c.e2;
    c.psi2 = c.dual[1][0] * c.e1 + c.dual[1][1] * c.e2;
    return c;
}

// Race-free memo of cokernel pairs keyed on (b, grid).
class CokernelCache {
public:
    static CokernelCache& instance()
    {
        static CokernelCache cache;
        return cache;
    }

    std::shared_ptr<const CokernelPair> get(double b, const Grid& g)
    {
        const Key key{b, g.half_width, g.n_points};
        {
            std::shared_lock lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        auto value = std::make_shared<const CokernelPair>(cokernel(b, g));
        std::unique_lock lock(mutex_);
        if (map_.size() > 256) map_.clear();
        return map_.emplace(key, value).first->second;
    }

private:
    using Key = std::tuple<double, double, std::size_t>;
    std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const CokernelPair>> map_;
};

// -------------------------------------------------------------------------
// L_b = d_xx - 2 b tanh(x) d_x and the bordered operator T_b

inline Field apply_Lb(double b, const Field& u)
{
    const Field S = Field::from_function(u.grid, front::S);
    return derivative(u, 2) - (2.0 * b) * (S * derivative(u, 1));
}

inline Field apply_Tb(double b, const Field& rho, double alpha, double beta)
{
    return apply_Lb(b, rho) + alpha * detail::e1_field(rho.grid) + beta * detail::e2_field(rho.grid);
}

struct LbSolveReport {
    Field u;
    double continuity_u = 0, continuity_ux = 0;
    std::array<double, 2> defects{};
};

constexpr double solvability_tolerance = 1e-8;

inline LbSolveReport solve_Lb_report(double b, const Field& f, const CokernelPair* cok = nullptr)
{
    if (!(b >= 0.0)) throw std::domain_error("L_b is only inverted for b >= 0");
    std::shared_ptr<const CokernelPair> owned;
    if (!cok) {
        owned = CokernelCache::instance().get(b, f.grid);
        cok = owned.get();
    }
    LbSolveReport rep;
    rep.defects = cok->defects(f);
    const double s1 = detail::abs_pairing(f, cok->psi1_star), s2 = detail::abs_pairing(f, cok->psi2_star);
    if (std::abs(rep.defects[0]) > solvability_tolerance * std::max(s1, 1e-300)
        || std::abs(rep.defects[1]) > solvability_tolerance * std::max(s2, 1e-300)) {
        std::ostringstream os;
        os << "right-hand side is not orthogonal to the cokernel: <f,psi1*> = " << rep.defects[0]
           << ", <f,psi2*> = " << rep.defects[1];
        throw SolvabilityError(os.str(), {rep.defects[0], rep.defects[1]});
    }
    const detail::FineLine line = detail::refine(f);
    const detail::MarchResult m = detail::march_Lb(line, b);
    rep.u = detail::coarsen(m.u, line, f.grid);
    rep.continuity_u = m.jump_u;
    rep.continuity_ux = m.jump_v;
    return rep;
}

inline Field solve_Lb(double b, const Field& f) { return solve_Lb_report(b, f).u; }

struct BorderedSolution {
    Field rho;
    double alpha = 0, beta = 0;
    double residual_norm = 0;                 // relative, in L^2_gamma
    std::array<double, 2> solvability_defect{};
};

inline BorderedSolution solve_Tb(double b, const Field& f, double gamma = 2.0)
{
    if (!(b >= 0.0)) throw std::domain_error("T_b is only inverted for b >= 0");
    BorderedSolution s;
    if (b == 0.0) {
        const LaplaceSolution l = laplace_bordered(f);
        s.rho = l.phi;
        s.alpha = l.a;
        s.beta = l.b;
        const auto c = CokernelCache::instance().get(0.0, f.grid);
        s.solvability_defect = c->defects(f - s.alpha * c->e1 - s.beta * c->e2);
    } else {
        const auto c = CokernelCache::instance().get(b, f.grid);
        const auto ab = c->coefficients(f);
        s.alpha = ab[0];
        s.beta = ab[1];
        const Field r = f - s.alpha * c->e1 - s.beta * c->e2;
        const LbSolveReport rep = solve_Lb_report(b, r, c.get());
        s.rho = rep.u;
        s.solvability_defect = rep.defects;
    }
    const Field back = apply_Tb(b, s.rho, s.alpha, s.beta);
    s.residual_norm = norm(back - f, NormSpec::lp(gamma)) / std::max(norm(f, NormSpec::lp(gamma)), 1e-300);
    return s;
}

} // namespace pacemaker
