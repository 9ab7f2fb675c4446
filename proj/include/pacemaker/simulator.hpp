#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "evolution.hpp"

namespace pacemaker {

// outflow: affine extrapolation on sides that radiate; a side whose slope points inward is
// frozen at its current level and held there by a relaxation layer.
// wavetrain: affine extrapolation on both sides, always.
enum class Closure { outflow, wavetrain };

enum class InitialKind { zero, wavetrain, ansatz, custom };

struct SimConfig {
    Problem problem;
    double epsilon = 0.0;
    double dt = 0.02;
    double t_end = 400.0;
    InitialKind initial = InitialKind::zero;
    double initial_k = 0.0;          // wavetrain slope
    std::optional<Field> initial_field; // ansatz or custom profile
    Closure closure = Closure::outflow;
    double fit_window = 0.1;         // outer fraction per side used for the affine fit
    double output_interval = 1.0;
    bool nonlinear = true;
    double layer_rate = 1.0;         // relaxation rate of frozen sides
    double lock_fraction = 0.2;
    double lock_tolerance = 0.005;
};

struct SimState {
    Field phi;
    double t = 0.0;
    double omega_estimate = 0.0;
    std::array<double, 3> probes{};  // phi at -L/2, 0, L/2
    std::array<bool, 2> frozen{};    // right, left
    std::array<double, 2> frozen_level{};
};

struct SeriesSample {
    double t, phi_probe, omega_estimate, k_plus, k_minus;
    double probe_mean; // average over the three probes, used for the frequency fit
};

struct RunResult {
    SimState state;
    std::vector<SeriesSample> series;
    double omega = 0.0;        // robust fit over the final window
    double omega_spread = 0.0; // relative variation of the estimate over the final window
    bool locked = false;
    double k_plus = 0.0, k_minus = 0.0;
};

// Median of pairwise slopes.
inline double theil_sen_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t max_points = 800)
{
    const std::size_t m = t.size();
    if (m < 2) throw std::invalid_argument("slope fit needs two samples");
    const std::size_t stride = (m + max_points - 1) / max_points;
    std::vector<double> slopes;
    for (std::size_t i = 0; i < m; i += stride)
        for (std::size_t j = i + stride; j < m; j += stride)
            if (t[j] != t[i]) slopes.push_back((y[j] - y[i]) / (t[j] - t[i]));
    if (slopes.empty()) throw std::invalid_argument("slope fit needs distinct times");
    auto mid = slopes.begin() + static_cast<long>(slopes.size() / 2);
    std::nth_element(slopes.begin(), mid, slopes.end());
    if (slopes.size() % 2 == 1) return *mid;
    const double hi = *mid;
    return 0.5 * (hi + *std::max_element(slopes.begin(), mid));
}

inline std::array<double, 3> probe_values(const Field& phi)
{
    const std::size_t n = phi.size();
    auto mid = [&](std::size_t j) { return 0.5 * (phi[j - 1] + phi[j]); };
    return {mid(n / 4), mid(n / 2), mid(3 * n / 4)};
}

// Exponential time differencing (second order, Cox and Matthews) on phi = A + r: A is the
// affine far field refitted every step and drifted by its wave-train frequency, r is advanced
// with the linear part exact on the zero-padded grid and the rest explicit.
class Simulator {
public:
    explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)), ev_(cfg_.problem, cfg_.epsilon)
    {
        const Grid& g = cfg_.problem.grid;
        if (!(cfg_.dt > 0.0) || !std::isfinite(cfg_.dt)) throw ConfigError("time step must be positive");
        if (!(cfg_.t_end >= 0.0)) throw ConfigError("end time must be nonnegative");
        if (!(cfg_.fit_window > 0.0 && cfg_.fit_window < 0.5)) throw ConfigError("fit window fraction must lie in (0, 0.5)");
        if (!(cfg_.output_interval > 0.0)) throw ConfigError("output interval must be positive");
        if (g.n_points % 4 != 0) throw ConfigError("simulation grid needs n_points divisible by 4 for the probes");
        const std::vector<cplx> lin = ev_.linear_symbol();
        e_.resize(lin.size());
        p1_.resize(lin.size());
        p2_.resize(lin.size());
        for (std::size_t k = 0; k < lin.size(); ++k) {
            if (lin[k].real() > 1e-12 || std::abs(lin[k].imag()) > 1e-12)
                throw ConfigError("linear symbol must be real and nonpositive for the exponential integrator");
            const double z = lin[k].real() * cfg_.dt;
            e_[k] = std::exp(z);
            if (std::abs(z) < 1e-4) {
                p1_[k] = 1.0 + z / 2.0 + z * z / 6.0;
                p2_[k] = 0.5 + z / 6.0 + z * z / 24.0;
            } else {
                p1_[k] = std::expm1(z) / z;
                p2_[k] = (std::expm1(z) - z) / (z * z);
            }
        }
        layer_ = Field(g);
        const double L = g.half_width, w = cfg_.fit_window * L;
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double s = (std::abs(g.x(j)) - (L - w)) / w;
            if (s > 0.0) layer_[j] = cfg_.layer_rate * std::pow(std::sin(0.5 * std::numbers::pi * s), 2);
        }
    }

    const SimConfig& config() const { return cfg_; }

    SimState initial_state() const
    {
        const Grid& g = cfg_.problem.grid;
        SimState s;
        switch (cfg_.initial) {
        case InitialKind::zero: s.phi = Field(g); break;
        case InitialKind::wavetrain: s.phi = Field::from_function(g, [&](double x) { return cfg_.initial_k * x; }); break;
        case InitialKind::ansatz:
        case InitialKind::custom:
            if (!cfg_.initial_field) throw ConfigError("initial profile missing");
            require_same_grid(cfg_.initial_field->grid, g);
            s.phi = *cfg_.initial_field;
            break;
        }
        for (double v : s.phi.values)
            if (!std::isfinite(v)) throw ConfigError("initial profile has non-finite values");
        check_cfl(s.phi);
        s.probes = probe_values(s.phi);
        return s;
    }

    // Advective bound for the explicit transport term.
    void check_cfl(const Field& phi) const
    {
        const AffineFarField a = fit_affine(phi, cfg_.fit_window);
        const Field v = ev_.transport(a, padded_spectrum(phi - a.sample(phi.grid)));
        const double speed = 2.0 * v.max_abs();
        const double h = phi.grid.spacing();
        if (cfg_.nonlinear && speed * cfg_.dt / h > 1.0) {
            std::ostringstream os;
            os << "time step " << cfg_.dt << " violates the transport bound dt * 2 max|v| / h <= 1 (max|v| = " << speed / 2
               << ", h = " << h << ")";
            throw ConfigError(os.str());
        }
    }

    void step(SimState& s) const
    {
        const Grid& g = s.phi.grid;
        const AffineFarField a = closure_fit(s);
        const double kp = a.kc + a.kd, km = a.kc - a.kd;
        double drift_p = 0.0, drift_m = 0.0;
        if (cfg_.nonlinear) {
            const double kappa = cfg_.problem.kappa();
            if (!s.frozen[0]) drift_p = -kappa * kp * kp;
            if (!s.frozen[1]) drift_m = -kappa * km * km;
        }
        const double bc = 0.5 * (drift_p + drift_m), bd = 0.5 * (drift_p - drift_m);
        const Field A = a.sample(g);
        const Field r = s.phi - A;

        auto nonlinear_part = [&](const Field& rr, const std::vector<cplx>& spec) {
            Field out = ev_.affine_linear(a);
            out += ev_.forcing();
            if (cfg_.nonlinear) {
                const Field v = ev_.transport(a, spec);
                for (std::size_t j = 0; j < out.size(); ++j) out.values[j] -= v[j] * v[j];
            }
            for (std::size_t j = 0; j < out.size(); ++j) {
                out.values[j] -= bc + bd * std::tanh(g.x(j));
                const bool side_frozen = g.x(j) > 0 ? s.frozen[0] : s.frozen[1];
                if (side_frozen) out.values[j] -= layer_[j] * rr[j];
            }
            return out;
        };

        const std::vector<cplx> r_hat = padded_spectrum(r);
        const std::vector<cplx> n0_hat = padded_spectrum(nonlinear_part(r, r_hat));
        std::vector<cplx> a_hat(r_hat.size());
        for (std::size_t k = 0; k < a_hat.size(); ++k) a_hat[k] = e_[k] * r_hat[k] + cfg_.dt * p1_[k] * n0_hat[k];
        const Field mid = crop_padded(a_hat, g);
        const std::vector<cplx> mid_hat = padded_spectrum(mid);
        const std::vector<cplx> n1_hat = padded_spectrum(nonlinear_part(mid, mid_hat));
        for (std::size_t k = 0; k < a_hat.size(); ++k) a_hat[k] = e_[k] * r_hat[k] + cfg_.dt * (p1_[k] * n0_hat[k] + p2_[k] * (n1_hat[k] - n0_hat[k]));
        const Field r_new = crop_padded(std::move(a_hat), g);

        const double t_prev = s.t;
        for (std::size_t j = 0; j < g.n_points; ++j) {
            const double v = A[j] + cfg_.dt * (bc + bd * std::tanh(g.x(j))) + r_new[j];
            if (!std::isfinite(v) || std::abs(r_new[j]) > 1e8) {
                std::ostringstream os;
                os << "numerical blowup at t = " << t_prev + cfg_.dt << " (x = " << g.x(j) << ")";
                throw BlowupError(os.str(), t_prev);
            }
            s.phi.values[j] = v;
        }
        s.t = t_prev + cfg_.dt;
    }

    RunResult run(std::optional<SimState> start = std::nullopt) const
    {
        RunResult res;
        SimState s = start ? *start : initial_state();
        const long steps = std::lround(cfg_.t_end / cfg_.dt);
        const long every = std::max(1L, std::lround(cfg_.output_interval / cfg_.dt));
        auto record = [&](double prev_mean, double prev_t) {
            const auto pr = probe_values(s.phi);
            const double mean = (pr[0] + pr[1] + pr[2]) / 3.0;
            if (s.t > prev_t) s.omega_estimate = -(mean - prev_mean) / (s.t - prev_t);
            s.probes = pr;
            const AffineFarField a = fit_affine(s.phi, cfg_.fit_window);
            res.series.push_back({s.t, pr[1], s.omega_estimate, a.kc + a.kd, a.kc - a.kd, mean});
            return mean;
        };
        double prev_mean = record(0.0, s.t), prev_t = s.t;
        for (long i = 1; i <= steps; ++i) {
            step(s);
            if (i % every == 0 || i == steps) {
                prev_mean = record(prev_mean, prev_t);
                prev_t = s.t;
            }
        }
        summarize(res);
        res.state = std::move(s);
        return res;
    }

private:
    AffineFarField closure_fit(SimState& s) const
    {
        const Field& phi = s.phi;
        SideFit side[2] = {fit_side(phi, true, 1.0 - cfg_.fit_window, 1.0), fit_side(phi, false, 1.0 - cfg_.fit_window, 1.0)};
        double o[2] = {side[0].offset, side[1].offset}, k[2] = {side[0].slope, side[1].slope};
        if (cfg_.closure == Closure::outflow) {
            const double L = phi.grid.half_width;
            for (int i = 0; i < 2; ++i) {
                const double outward = i == 0 ? 1.0 : -1.0;
                if (!s.frozen[i] && k[i] * outward < -inward_threshold) {
                    s.frozen[i] = true;
                    s.frozen_level[i] = o[i] + k[i] * outward * (1.0 - 0.5 * cfg_.fit_window) * L;
                }
                if (s.frozen[i]) {
                    o[i] = s.frozen_level[i];
                    k[i] = 0.0;
                }
            }
        }
        return AffineFarField::from_sides(o[0], k[0], o[1], k[1]);
    }

    void summarize(RunResult& res) const
    {
        const auto& ser = res.series;
        if (ser.size() < 3) return;
        const double t_last = ser.back().t, t0 = t_last - cfg_.lock_fraction * (t_last - ser.front().t);
        std::vector<double> ts, ys, est;
        for (const auto& smp : ser) {
            if (smp.t < t0) continue;
            ts.push_back(smp.t);
            ys.push_back(smp.probe_mean);
            est.push_back(smp.omega_estimate);
        }
        if (ts.size() < 2) return;
        res.omega = -theil_sen_slope(ts, ys);
        const auto [lo, hi] = std::minmax_element(est.begin(), est.end());
        res.omega_spread = std::abs(res.omega) > 0 ? (*hi - *lo) / std::abs(res.omega) : INFINITY;
        res.locked = res.omega_spread < cfg_.lock_tolerance;
        res.k_plus = ser.back().k_plus;
        res.k_minus = ser.back().k_minus;
    }

    static constexpr double inward_threshold = 1e-6;
    SimConfig cfg_;
    Evolution ev_;
    std::vector<double> e_, p1_, p2_;
    Field layer_;
};

inline SimState step(const SimState& state, const SimConfig& cfg)
{
    SimState s = state;
    Simulator(cfg).step(s);
    return s;
}

inline RunResult run(const SimConfig& cfg) { return Simulator(cfg).run(); }

} // namespace pacemaker
