#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "diagnostics.hpp"

namespace pacemaker {

struct CriterionResult {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;
};

struct VerifySettings {
    InhomogeneityParams g;
    KernelParams G{KernelFamily::gaussian, 1.0, 1.0, {}, {}};
    KernelParams J{KernelFamily::gaussian, 1.0, 1.0, {}, {}};
    double corrector_L = 60.0;
    std::size_t corrector_n = 1024;
    CorrectorOptions corrector;
    double sim_L = 60.0;
    std::size_t sim_n = 512;
    std::size_t sim_n_coarse = 256; // resolution check for the oracle comparison
    double sim_dt = 0.2;
    double sim_t_min = 400.0;
    double lock_periods = 12.0;     // run length in units of 1/omega
    std::vector<double> sweep{0.025, 0.05, 0.1};
    std::vector<double> oracle_eps{0.05, 0.1, 0.2};
    double wrong_sign_eps = -0.1;
    double wrong_sign_L = 30.0;
    std::size_t wrong_sign_n = 256;
    double wrong_sign_T = 2000.0;
    double self_eps = 0.1;
    OracleOptions oracle;
    int jobs = 1;
    std::function<void(const std::string&)> log;
};

struct SweepPoint {
    Model model = Model::local;
    double eps = 0.0;
    std::size_t n = 0;
    bool corrector_ok = false;
    PacemakerAnsatz ansatz;
    CorrectorState state;
    double leading_residual = 0.0;
    bool sim_ok = false;
    RunResult sim;
    double sim_T = 0.0;
    FarFieldFit far;
    std::string error;
};

// Shared sweep cache and setup for the acceptance criteria.
class Verifier {
public:
    explicit Verifier(VerifySettings s) : s_(std::move(s))
    {
        cgrid_ = Grid(s_.corrector_L, s_.corrector_n);
        ginh_ = std::make_shared<Inhomogeneity>(make_inhomogeneity(s_.g, cgrid_));
    }

    const VerifySettings& settings() const { return s_; }

    Problem corrector_problem(Model m) const { return problem_on(m, cgrid_); }

    Problem problem_on(Model m, const Grid& g) const
    {
        const Inhomogeneity inh = make_inhomogeneity(s_.g, g);
        return Problem(m, inh, kernels_on(g));
    }

    std::shared_ptr<const KernelSet> kernels_on(const Grid& g) const
    {
        std::lock_guard lock(mu_);
        const auto key = std::pair{g.half_width, g.n_points};
        auto it = kernels_.find(key);
        if (it != kernels_.end()) return it->second;
        auto k = KernelSet::make(make_kernel(s_.G, g), make_kernel(s_.J, g));
        kernels_[key] = k;
        return k;
    }

    double g0() const { return ginh_->g0; }
    double G2() const { return kernels_on(cgrid_)->sym.G2; }
    double J0() const { return kernels_on(cgrid_)->sym.J0; }
    double kappa(Model m) const { return m == Model::local ? 1.0 : J0() * J0(); }
    double predicted_slope(Model m) const { return m == Model::local ? -g0() / 2.0 : -g0() / G2(); }

    // Corrector plus a long simulation at (model, eps, n); cached.
    const SweepPoint& point(Model m, double eps, std::size_t n = 0)
    {
        if (n == 0) n = s_.sim_n;
        const auto key = std::tuple{static_cast<int>(m), eps, n};
        {
            std::lock_guard lock(mu_);
            auto it = points_.find(key);
            if (it != points_.end()) return *it->second;
        }
        auto p = std::make_shared<SweepPoint>(compute(m, eps, n));
        std::lock_guard lock(mu_);
        auto [it, inserted] = points_.emplace(key, p);
        return *it->second;
    }

    // Fill the cache for several points with up to settings().jobs workers.
    void prefetch(const std::vector<std::tuple<Model, double, std::size_t>>& pts)
    {
        const int jobs = std::max(1, s_.jobs);
        std::vector<std::future<void>> running;
        std::size_t next = 0;
        while (next < pts.size() || !running.empty()) {
            while (next < pts.size() && static_cast<int>(running.size()) < jobs) {
                const auto [m, e, n] = pts[next++];
                running.push_back(std::async(std::launch::async, [this, m, e, n] { point(m, e, n); }));
            }
            running.front().get();
            running.erase(running.begin());
        }
    }

    std::vector<SweepPoint> cached_points() const
    {
        std::lock_guard lock(mu_);
        std::vector<SweepPoint> out;
        for (const auto& [k, v] : points_) out.push_back(*v);
        return out;
    }

private:
    void log(const std::string& msg) const
    {
        if (s_.log) s_.log(msg);
    }

    SweepPoint compute(Model m, double eps, std::size_t n) const
    {
        SweepPoint sp;
        sp.model = m;
        sp.eps = eps;
        sp.n = n;
        const Problem cp = corrector_problem(m);
        const LeadingOrder lo = leading_order(cp);
        double omega_pred = kappa(m) * std::pow(eps * lo.b1, 2);
        try {
            auto [st, an] = correct(cp, eps, lo, s_.corrector);
            sp.state = std::move(st);
            sp.ansatz = std::move(an);
            sp.corrector_ok = true;
            sp.leading_residual = ansatz_residual(cp, leading_order_ansatz(cp, eps, lo), s_.corrector.sigma);
            omega_pred = sp.ansatz.omega;
        } catch (const std::exception& e) {
            sp.error = std::string("corrector: ") + e.what();
        }
        const Grid sg(s_.sim_L, n);
        SimConfig c;
        c.problem = problem_on(m, sg);
        c.epsilon = eps;
        c.dt = s_.sim_dt;
        c.t_end = std::max(s_.sim_t_min, s_.lock_periods / std::max(omega_pred, 1e-12));
        c.output_interval = std::max(1.0, c.t_end / 4000.0);
        sp.sim_T = c.t_end;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            sp.sim = Simulator(c).run();
            sp.far = fit_far_field(sp.sim.state.phi, 0.5, kappa(m));
            sp.sim_ok = true;
        } catch (const std::exception& e) {
            sp.error += (sp.error.empty() ? "" : "; ") + std::string("simulation: ") + e.what();
        }
        std::ostringstream os;
        os << to_string(m) << " eps=" << eps << " n=" << n << " T=" << c.t_end << " omega_sim=" << sp.sim.omega
           << " k+=" << sp.far.k_plus << " (" << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
           << " s)";
        log(os.str());
        return sp;
    }

    VerifySettings s_;
    Grid cgrid_;
    std::shared_ptr<Inhomogeneity> ginh_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<double, std::size_t>, std::shared_ptr<const KernelSet>> kernels_;
    std::map<std::tuple<int, double, std::size_t>, std::shared_ptr<SweepPoint>> points_;
};

namespace detail {

inline std::string fmt(double v, int prec = 6)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

inline Field random_bump_sum(std::mt19937_64& rng, const Grid& g)
{
    std::uniform_real_distribution<double> c(-5, 5), w(0.6, 2.0), a(-1, 1);
    double cs[4], ws[4], as[4], ps[4];
    for (int i = 0; i < 4; ++i) { cs[i] = c(rng); ws[i] = w(rng); as[i] = a(rng); ps[i] = 3 * a(rng); }
    return Field::from_function(g, [&](double x) {
        double s = 0;
        for (int i = 0; i < 4; ++i) s += as[i] * std::exp(-(x - cs[i]) * (x - cs[i]) / (ws[i] * ws[i])) * std::cos(ps[i] * x);
        return s;
    });
}

inline double rel_l2(const Field& a, const Field& b)
{
    return norm(a - b, NormSpec::lp(2.0)) / std::max(norm(b, NormSpec::lp(2.0)), 1e-300);
}

template <class F>
CriterionResult timed(const std::string& id, const std::string& title, double budget, F&& body)
{
    CriterionResult r;
    r.id = id;
    r.title = title;
    r.budget = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail += (r.detail.empty() ? "" : "; ") + std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds > budget) {
        r.pass = false;
        r.detail += "; runtime " + fmt(r.seconds, 3) + " s over budget " + fmt(budget, 3) + " s";
    }
    return r;
}

} // namespace detail

inline CriterionResult criterion_a1()
{
    return detail::timed("A1", "scalar-product table", 1.0, [](CriterionResult& r) {
        const Grid g(40.0, 1024);
        const Field S = Field::from_function(g, front::S), xS = Field::from_function(g, front::xS);
        const Field one = Field::from_function(g, [](double) { return 1.0; }), x = Field::from_function(g, [](double v) { return v; });
        const Field d2S = derivative(S, 2), d2xS = derivative(xS, 2);
        const double v[4] = {pairing(d2S, one), pairing(d2S, x), pairing(d2xS, one), pairing(d2xS, x)};
        const double want[4] = {0.0, -2.0, 2.0, 0.0};
        double err = 0.0;
        for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(v[i] - want[i]));
        r.pass = err < 1e-8;
        r.detail = "(" + detail::fmt(v[0], 3) + ", " + detail::fmt(v[1], 12) + ", " + detail::fmt(v[2], 12) + ", "
                   + detail::fmt(v[3], 3) + ") max error " + detail::fmt(err, 3) + " (tol 1e-8)";
    });
}

inline CriterionResult criterion_a2()
{
    return detail::timed("A2", "solver residuals", 30.0, [](CriterionResult& r) {
        const Grid g(40.0, 1024);
        std::mt19937_64 rng(20240611);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        double worst_lap = 0, worst_lb = 0, worst_tb = 0;
        for (int t = 0; t < 50; ++t) {
            const Field phi = detail::random_bump_sum(rng, g);
            const double a = coef(rng), b = coef(rng);
            const Field f = derivative(phi, 2) + a * detail::e1_field(g) + b * detail::e2_field(g);
            const LaplaceSolution s = laplace_bordered(f);
            const Field back = derivative(s.phi, 2) + s.a * detail::e1_field(g) + s.b * detail::e2_field(g);
            worst_lap = std::max(worst_lap, detail::rel_l2(back, f));
        }
        for (double b : {0.0, 0.05, 0.2, 0.5}) {
            for (int t = 0; t < 50; ++t) {
                const Field u = detail::random_bump_sum(rng, g);
                const Field f = apply_Lb(b, u);
                worst_lb = std::max(worst_lb, detail::rel_l2(apply_Lb(b, solve_Lb(b, f)), f));
                const double al = coef(rng), be = coef(rng);
                const Field ft = apply_Tb(b, u, al, be);
                const BorderedSolution s = solve_Tb(b, ft);
                worst_tb = std::max(worst_tb, detail::rel_l2(apply_Tb(b, s.rho, s.alpha, s.beta), ft));
            }
        }
        r.pass = worst_lap < 1e-7 && worst_lb < 1e-7 && worst_tb < 1e-7;
        r.detail = "max relative residual laplace " + detail::fmt(worst_lap, 3) + ", L_b " + detail::fmt(worst_lb, 3) + ", T_b "
                   + detail::fmt(worst_tb, 3) + " (tol 1e-7, 50 cases each, b in {0, 0.05, 0.2, 0.5})";
    });
}

inline CriterionResult criterion_a3()
{
    return detail::timed("A3", "bound scalings", 60.0, [](CriterionResult& r) {
        // L_b: C/b bound, sharp for data varying on scales longer than 1/b
        const Grid wide(300.0, 4096);
        std::vector<double> bs{0.1, 0.2, 0.4}, ratios;
        for (double b : bs) {
            const CokernelPair c = cokernel(b, wide);
            const Field f = c.project(Field::from_function(wide, [](double x) { return std::exp(-x * x / 1600.0); }));
            const Field u = solve_Lb(b, f);
            ratios.push_back(norm(derivative(u, 1), NormSpec::lp(2.0)) / norm(f, NormSpec::lp(2.0)));
        }
        const double lb_exp = loglog_slope(bs, ratios);
        // T_b: uniform bound in M^{2,2}_{gamma-2}
        const Grid g(40.0, 1024);
        const Field f = Field::from_function(g, [](double x) { return std::exp(-(x - 0.5) * (x - 0.5)) * (1 + x); });
        double lo = 1e300, hi = 0;
        for (double b : {0.05, 0.1, 0.2, 0.4}) {
            const BorderedSolution s = solve_Tb(b, f);
            const double q = norm(s.rho, NormSpec::kondratiev(0.0, 2)) / norm(f, NormSpec::lp(2.0));
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        // antiderivative: operator norm against the distance to the critical weight 1 - 1/p
        std::vector<double> gbar{0.1, 0.05, 0.02}, norms;
        for (double d : gbar) norms.push_back(antiderivative_operator_norm(0.5 + d, 60.0 / d));
        const double ad_exp = loglog_slope(gbar, norms);
        const bool ok1 = std::abs(lb_exp + 1.0) <= 0.3, ok2 = hi / lo < 2.0, ok3 = std::abs(ad_exp + 1.0) <= 0.2;
        r.pass = ok1 && ok2 && ok3;
        r.detail = "L_b exponent " + detail::fmt(lb_exp, 4) + " (-1 +- 0.3), T_b max/min ratio " + detail::fmt(hi / lo, 4)
                   + " (< 2), antiderivative exponent " + detail::fmt(ad_exp, 4) + " (-1 +- 0.2)";
    });
}

namespace detail {

inline CriterionResult slope_criterion(Verifier& v, Model m, const std::string& id, double budget)
{
    return timed(id, "wavenumber selection, " + to_string(m), budget, [&](CriterionResult& r) {
        const auto& s = v.settings();
        std::vector<std::tuple<Model, double, std::size_t>> pts;
        for (double e : s.sweep) pts.emplace_back(m, e, s.sim_n);
        v.prefetch(pts);
        std::vector<double> eps, k_an, k_sim;
        std::string errors;
        for (double e : s.sweep) {
            const SweepPoint& p = v.point(m, e);
            if (!p.corrector_ok || !p.sim_ok) errors += " [" + p.error + "]";
            eps.push_back(e);
            k_an.push_back(p.ansatz.k);
            k_sim.push_back(p.far.k_plus);
        }
        const double target = v.predicted_slope(m);
        const LineFit fa = least_squares_line(eps, k_an), fs = least_squares_line(eps, k_sim);
        const double rel_a = std::abs(fa.slope - target) / std::abs(target), rel_s = std::abs(fs.slope - target) / std::abs(target);
        r.pass = errors.empty() && rel_a <= 0.05 && rel_s <= 0.05;
        std::ostringstream os;
        os << "target k'(0) = " << fmt(target, 6) << "; linear fit slope ansatz " << fmt(fa.slope, 6) << " (" << fmt(100 * rel_a, 3)
           << "%, intercept " << fmt(fa.intercept, 3) << "), simulation " << fmt(fs.slope, 6) << " (" << fmt(100 * rel_s, 3)
           << "%, intercept " << fmt(fs.intercept, 3) << "); tol 5%; k+ ansatz/sim:";
        for (std::size_t i = 0; i < eps.size(); ++i) os << " " << fmt(k_an[i], 7) << "/" << fmt(k_sim[i], 7);
        os << "; quadratic-through-origin slope ansatz " << fmt(quadratic_through_origin_slope(eps, k_an), 6) << ", simulation "
           << fmt(quadratic_through_origin_slope(eps, k_sim), 6) << errors;
        r.detail = os.str();
    });
}

} // namespace detail

inline CriterionResult criterion_a4(Verifier& v) { return detail::slope_criterion(v, Model::local, "A4", 600.0); }
inline CriterionResult criterion_a5(Verifier& v) { return detail::slope_criterion(v, Model::nonlocal, "A5", 900.0); }

inline CriterionResult criterion_a6(Verifier& v)
{
    return detail::timed("A6", "frequency scaling", 900.0, [&](CriterionResult& r) {
        const auto& s = v.settings();
        std::vector<std::tuple<Model, double, std::size_t>> pts;
        for (Model m : {Model::local, Model::nonlocal})
            for (double e : s.sweep) pts.emplace_back(m, e, s.sim_n);
        v.prefetch(pts);
        bool ok = true;
        std::ostringstream os;
        for (Model m : {Model::local, Model::nonlocal}) {
            std::vector<double> eps, om_sim, om_an;
            for (double e : s.sweep) {
                const SweepPoint& p = v.point(m, e);
                ok = ok && p.sim_ok && p.sim.locked;
                eps.push_back(e);
                om_sim.push_back(p.sim.omega);
                om_an.push_back(p.ansatz.omega);
            }
            const double sl = loglog_slope(eps, om_sim);
            ok = ok && std::abs(sl - 2.0) <= 0.1;
            os << to_string(m) << " slope " << detail::fmt(sl, 5) << " (ansatz " << detail::fmt(loglog_slope(eps, om_an), 5)
               << ", omega_sim";
            for (double w : om_sim) os << " " << detail::fmt(w, 6);
            os << "); ";
        }
        os << "tol 2 +- 0.1";
        r.pass = ok;
        r.detail = os.str();
    });
}

inline CriterionResult criterion_a7(Verifier& v)
{
    return detail::timed("A7", "oracle equivalence (local)", 300.0, [&](CriterionResult& r) {
        const auto& s = v.settings();
        std::vector<std::tuple<Model, double, std::size_t>> pts;
        for (double e : s.oracle_eps) {
            pts.emplace_back(Model::local, e, s.sim_n);
            pts.emplace_back(Model::local, e, s.sim_n_coarse);
        }
        v.prefetch(pts);
        const Problem p = v.corrector_problem(Model::local);
        bool ok = true;
        std::ostringstream os;
        for (double e : s.oracle_eps) {
            const SweepPoint& fine = v.point(Model::local, e, s.sim_n);
            const SweepPoint& coarse = v.point(Model::local, e, s.sim_n_coarse);
            const OracleResult o = cole_hopf_oracle(p.g, e, s.oracle);
            const double conv = std::abs(fine.sim.omega - coarse.sim.omega) / std::abs(fine.sim.omega);
            const double dev = std::abs(fine.sim.omega - o.omega) / o.omega;
            ok = ok && fine.sim_ok && fine.sim.locked && conv < 0.005 && dev < 0.02;
            os << "eps=" << e << ": sim " << detail::fmt(fine.sim.omega, 7) << " oracle " << detail::fmt(o.omega, 7) << " ("
               << detail::fmt(100 * dev, 3) << "%, n change " << detail::fmt(100 * conv, 3) << "%); ";
        }
        os << "tol 2%";
        r.pass = ok;
        r.detail = os.str();
    });
}

inline CriterionResult criterion_a8(Verifier& v)
{
    return detail::timed("A8", "sign condition", 120.0, [&](CriterionResult& r) {
        const auto& s = v.settings();
        const double eps = std::abs(s.wrong_sign_eps) * (v.g0() > 0 ? 1.0 : -1.0);
        const Grid g(s.wrong_sign_L, s.wrong_sign_n);
        bool ok = true;
        std::ostringstream os;
        for (Model m : {Model::local, Model::nonlocal}) {
            SimConfig c;
            c.problem = v.problem_on(m, g);
            c.epsilon = eps;
            c.dt = s.sim_dt;
            c.t_end = s.wrong_sign_T;
            const RunResult res = Simulator(c).run();
            double tail = 0.0;
            for (const auto& smp : res.series)
                if (smp.t >= 0.8 * c.t_end) tail = std::max(tail, std::abs(smp.omega_estimate));
            bool refused = false;
            const Problem cp = v.corrector_problem(m);
            try {
                correct(cp, eps, leading_order(cp), s.corrector);
            } catch (const SignConditionError&) {
                refused = true;
            }
            ok = ok && std::abs(res.omega) < 1e-5 && tail < 1e-5 && refused;
            os << to_string(m) << ": omega " << detail::fmt(res.omega, 3) << ", max |estimate| over final 20% "
               << detail::fmt(tail, 3) << ", corrector " << (refused ? "refused" : "accepted") << "; ";
        }
        os << "eps = " << eps << ", tol 1e-5";
        r.pass = ok;
        r.detail = os.str();
    });
}

inline CriterionResult criterion_a9(Verifier& v)
{
    return detail::timed("A9", "dispersion closure", 120.0, [&](CriterionResult& r) {
        const auto& s = v.settings();
        const Grid g(s.wrong_sign_L, s.wrong_sign_n);
        SimConfig c;
        c.problem = v.problem_on(Model::nonlocal, g);
        c.epsilon = 0.0;
        c.dt = s.sim_dt;
        c.t_end = 100.0;
        c.initial = InitialKind::wavetrain;
        c.initial_k = 0.2;
        c.closure = Closure::wavetrain;
        const RunResult wt = Simulator(c).run();
        const double target = v.kappa(Model::nonlocal) * 0.04;
        const double dev_wt = std::abs(wt.omega - target) / target;
        bool ok = wt.locked && dev_wt < 0.01;
        std::ostringstream os;
        os << "wave train omega " << detail::fmt(wt.omega, 8) << " vs " << detail::fmt(target, 6) << " (" << detail::fmt(100 * dev_wt, 3)
           << "%, tol 1%); pacemakers:";
        std::vector<std::tuple<Model, double, std::size_t>> pts;
        for (double e : s.sweep) pts.emplace_back(Model::nonlocal, e, s.sim_n);
        v.prefetch(pts);
        for (double e : s.sweep) {
            const SweepPoint& p = v.point(Model::nonlocal, e);
            const double pred = v.kappa(Model::nonlocal) * p.far.k_plus * p.far.k_plus;
            const double dev = std::abs(p.sim.omega - pred) / pred;
            ok = ok && p.sim_ok && dev < 0.03;
            os << " eps=" << e << " " << detail::fmt(p.sim.omega, 6) << " vs J0^2 k+^2 " << detail::fmt(pred, 6) << " ("
               << detail::fmt(100 * dev, 3) << "%)";
        }
        os << "; tol 3%";
        r.pass = ok;
        r.detail = os.str();
    });
}

inline CriterionResult criterion_a10(Verifier& v)
{
    return detail::timed("A10", "self-consistency", 300.0, [&](CriterionResult& r) {
        const auto& s = v.settings();
        const double eps = s.self_eps;
        bool ok = true;
        std::ostringstream os;
        for (Model m : {Model::local, Model::nonlocal}) {
            const Problem cp = v.corrector_problem(m);
            const LeadingOrder lo = leading_order(cp);
            const auto [st, an] = correct(cp, eps, lo, s.corrector);
            const double lead = ansatz_residual(cp, leading_order_ansatz(cp, eps, lo), s.corrector.sigma);
            SimConfig c;
            c.problem = cp;
            c.epsilon = eps;
            c.dt = 0.05;
            c.t_end = 50.0;
            c.initial = InitialKind::ansatz;
            c.initial_field = an.assembled();
            Simulator sim(c);
            SimState state = sim.initial_state();
            const Field phi0 = an.assembled();
            double drift = 0.0;
            const long steps = std::lround(c.t_end / c.dt);
            for (long i = 0; i < steps; ++i) {
                sim.step(state);
                for (std::size_t j = 0; j < phi0.size(); ++j)
                    drift = std::max(drift, std::abs(state.phi[j] + an.omega * state.t - phi0[j]));
            }
            const bool good = drift < 1e-3 && st.steady_residual < 1e-6 && lead >= 10.0 * st.steady_residual;
            ok = ok && good;
            os << to_string(m) << ": sup drift " << detail::fmt(drift, 3) << " (tol 1e-3), residual " << detail::fmt(st.steady_residual, 3)
               << " (tol 1e-6), leading-order residual " << detail::fmt(lead, 3) << " (ratio " << detail::fmt(lead / st.steady_residual, 3)
               << ", need >= 10); ";
        }
        os << "eps = " << eps;
        r.pass = ok;
        r.detail = os.str();
    });
}

inline std::vector<CriterionResult> run_all_criteria(Verifier& v, const std::function<void(const CriterionResult&)>& on_done = {})
{
    std::vector<CriterionResult> out;
    auto add = [&](CriterionResult r) {
        if (on_done) on_done(r);
        out.push_back(std::move(r));
    };
    add(criterion_a1());
    add(criterion_a2());
    add(criterion_a3());
    add(criterion_a4(v));
    add(criterion_a5(v));
    add(criterion_a6(v));
    add(criterion_a7(v));
    add(criterion_a8(v));
    add(criterion_a9(v));
    add(criterion_a10(v));
    return out;
}

} // namespace pacemaker
