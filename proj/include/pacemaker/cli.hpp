#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace pacemaker::cli {

enum ExitCode { ok = 0, criterion_failure = 1, config_error = 2, blowup = 3 };

// Shortest round-trip representation.
inline std::string num(double v)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string eps_tag(double e)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "eps%g", e);
    return buf;
}

// Free-text CSV cell without separators or line breaks.
inline std::string text(std::string s)
{
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

class Csv {
public:
    Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path)
    {
        if (!out_) throw ConfigError("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

// Runs f(0..n-1) on up to jobs workers; results keep input order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& f)
{
    std::vector<T> out(n);
    std::vector<std::future<void>> running;
    std::size_t next = 0;
    while (next < n || !running.empty()) {
        while (next < n && static_cast<int>(running.size()) < std::max(1, jobs)) {
            const std::size_t i = next++;
            running.push_back(std::async(std::launch::async, [&out, &f, i] { out[i] = f(i); }));
        }
        running.front().get();
        running.erase(running.begin());
    }
    return out;
}

inline Problem make_problem(const RunConfig& c, const Grid& g)
{
    const Inhomogeneity inh = make_inhomogeneity(c.g, g);
    std::shared_ptr<const KernelSet> k;
    if (c.model == Model::nonlocal) k = KernelSet::make(make_kernel(c.G, g), make_kernel(c.J, g));
    return Problem(c.model, inh, k);
}

inline void write_profile(const std::filesystem::path& path, const Field& f, const std::string& name)
{
    Csv csv(path, {"x [length] position", name});
    for (std::size_t j = 0; j < f.size(); ++j) csv.row({num(f.grid.x(j)), num(f[j])});
}

inline void write_script(const std::filesystem::path& path, const std::string& body)
{
    std::ofstream out(path);
    out << "import csv\nimport glob\nimport os\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n"
        << "here = os.path.dirname(os.path.abspath(__file__))\n\n"
        << "def load(name):\n"
        << "    with open(os.path.join(here, name)) as f:\n"
        << "        rows = list(csv.reader(f))\n"
        << "    cols = list(zip(*rows[1:])) if len(rows) > 1 else [[] for _ in rows[0]]\n"
        << "    return {h.split(\" \")[0]: list(c) for h, c in zip(rows[0], cols)}\n\n"
        << "def floats(v):\n"
        << "    return [float(x) for x in v]\n\n"
        << body;
}

struct Context {
    RunConfig cfg;
    std::filesystem::path out;
    bool dump_cokernel = false;
    std::ostream* log = &std::cerr;
};

inline void emit_warnings(const Context& ctx, const std::vector<std::string>& w)
{
    for (const auto& s : w) *ctx.log << "warning: " << s << "\n";
}

// ---------------------------------------------------------------------------

inline int cmd_init(const std::filesystem::path& path, std::ostream& out)
{
    if (path.empty()) {
        out << config_template;
        return ok;
    }
    if (std::filesystem::exists(path)) throw ConfigError(path.string() + " already exists");
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << config_template;
    return ok;
}

inline int cmd_predict(const Context& ctx)
{
    const RunConfig& c = ctx.cfg;
    const Grid g(c.half_width, c.n_points);
    const Problem p = make_problem(c, g);
    check_sign_condition(c.epsilon, p.g.g0, c.allow_wrong_sign);
    emit_warnings(ctx, resolution_warnings(c));
    const LeadingOrder lo = leading_order(p);
    struct Row {
        std::vector<std::string> cells;
        bool ok = false;
    };
    const std::string model = to_string(c.model);
    const auto rows = parallel_map<Row>(c.epsilon.size(), c.jobs, [&](std::size_t i) {
        const double e = c.epsilon[i];
        Row r;
        try {
            const auto [st, an] = correct(p, e, lo, c.corrector);
            std::string status = "ok";
            if (st.steady_residual > c.residual_acceptance) status = "residual above acceptance";
            r.ok = true;
            r.cells = {num(e), num(an.k), num(an.phi0), num(an.omega), std::to_string(st.iterations), num(st.steady_residual),
                       num(an.group_velocity_plus()), status};
            if (c.snapshot) write_profile(ctx.out / ("predict_" + model + "_" + eps_tag(e) + "_profile.csv"), an.assembled(),
                                          "Phi [phase] pacemaker profile Phi(x) at t = 0");
            if (ctx.dump_cokernel && an.k >= 0.0) {
                const CokernelPair ck = cokernel(an.k, g);
                std::ofstream f1(ctx.out / ("predict_" + model + "_" + eps_tag(e) + "_psi1_star.txt"));
                std::ofstream f2(ctx.out / ("predict_" + model + "_" + eps_tag(e) + "_psi2_star.txt"));
                f1 << "# x psi1_star for b = " << num(an.k) << "\n";
                f2 << "# x psi2_star for b = " << num(an.k) << "\n";
                for (std::size_t j = 0; j < g.n_points; ++j) {
                    f1 << num(g.x(j)) << " " << num(ck.psi1_star[j]) << "\n";
                    f2 << num(g.x(j)) << " " << num(ck.psi2_star[j]) << "\n";
                }
            }
        } catch (const std::exception& ex) {
            r.cells = {num(e), "nan", "nan", "nan", "0", "nan", "nan", text(std::string("failed: ") + ex.what())};
        }
        return r;
    });
    Csv csv(ctx.out / "predict.csv",
            {"epsilon [1] forcing amplitude eps", "k [1/length] far-field wavenumber k", "phi0 [phase] far-field offset phi_0",
             "omega [1/time] frequency shift omega", "iterations [count] corrector iterations",
             "residual [1] steady residual in weighted L2", "c_g [length/time] outward group velocity at +infinity",
             "status [text] outcome"});
    std::size_t failed = 0;
    for (const auto& r : rows) {
        csv.row(r.cells);
        if (!r.ok) ++failed;
    }
    write_script(ctx.out / "plot_predict.py",
                 "d = load(\"predict.csv\")\n"
                 "eps, k, om = floats(d[\"epsilon\"]), floats(d[\"k\"]), floats(d[\"omega\"])\n"
                 "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
                 "ax[0].plot(eps, k, \"o-\"); ax[0].set_xlabel(\"eps\"); ax[0].set_ylabel(\"k\")\n"
                 "ax[1].loglog(eps, om, \"o-\"); ax[1].set_xlabel(\"eps\"); ax[1].set_ylabel(\"omega\")\n"
                 "fig.tight_layout(); fig.savefig(os.path.join(here, \"predict.png\"), dpi=120)\n");
    if (failed) {
        *ctx.log << (failed == rows.size() ? "error: corrector failed for every eps\n" : "warning: corrector failed for some eps\n");
        if (failed == rows.size()) return criterion_failure;
    }
    return ok;
}

inline Field read_initial_field(const RunConfig& c, const Grid& g)
{
    std::vector<double> x, y;
    detail::read_two_columns(detail::resolve(c.base_dir, c.sim.initial_file), x, y);
    const CubicSpline s(x, y);
    if (x.front() > g.x(0) || x.back() < g.x(g.n_points - 1))
        throw ConfigError("initial file does not cover [-L, L] of the simulator grid");
    return Field::from_function(g, [&](double v) { return s(v); });
}

inline int cmd_simulate(const Context& ctx)
{
    const RunConfig& c = ctx.cfg;
    const Grid cg(c.half_width, c.n_points), sg(c.half_width, c.sim.n_points);
    const Problem cp = make_problem(c, cg), sp = make_problem(c, sg);
    check_sign_condition(c.epsilon, sp.g.g0, c.allow_wrong_sign);
    emit_warnings(ctx, resolution_warnings(c));
    std::optional<Field> file_field;
    if (c.sim.initial == InitialKind::custom) file_field = read_initial_field(c, sg);
    const std::string model = to_string(c.model);
    struct Row {
        std::vector<std::string> cells;
        bool blowup = false;
    };
    const auto rows = parallel_map<Row>(c.epsilon.size(), c.jobs, [&](std::size_t i) {
        const double e = c.epsilon[i];
        SimConfig s;
        s.problem = sp;
        s.epsilon = e;
        s.dt = c.sim.dt;
        s.t_end = c.sim.t_end;
        s.closure = c.sim.closure;
        s.initial = c.sim.initial;
        s.initial_k = c.sim.initial_k;
        s.fit_window = c.sim.fit_window;
        s.output_interval = c.sim.output_interval;
        s.layer_rate = c.sim.layer_rate;
        if (file_field) s.initial_field = *file_field;
        const bool need_ansatz = c.sim.initial == InitialKind::ansatz;
        if (need_ansatz || c.sim.lock_periods > 0.0) {
            CorrectorOptions opt = c.corrector;
            double omega = sp.kappa() * std::pow(e * leading_order(cp).b1, 2);
            try {
                const auto an = correct(need_ansatz ? sp : cp, e, leading_order(need_ansatz ? sp : cp), opt).second;
                omega = an.omega;
                if (need_ansatz) s.initial_field = an.assembled();
            } catch (const std::exception& ex) {
                if (need_ansatz) throw ConfigError(std::string("initial ansatz unavailable: ") + ex.what());
            }
            if (c.sim.lock_periods > 0.0 && omega > 0.0) s.t_end = std::max(s.t_end, c.sim.lock_periods / omega);
        }
        Row r;
        const std::string stem = "simulate_" + model + "_" + eps_tag(e);
        try {
            const RunResult res = Simulator(s).run();
            Csv series(ctx.out / (stem + "_series.csv"),
                       {"t [time] simulation time", "phi_probe [phase] phase at the centre probe",
                        "omega_estimate [1/time] phase decrease rate of the probe mean",
                        "k_plus [1/length] fitted far-field slope at +L", "k_minus [1/length] fitted far-field slope at -L"});
            for (const auto& smp : res.series)
                series.row({num(smp.t), num(smp.phi_probe), num(smp.omega_estimate), num(smp.k_plus), num(smp.k_minus)});
            if (c.snapshot) write_profile(ctx.out / (stem + "_snapshot.csv"), res.state.phi, "phi [phase] phase at t_end");
            const FarFieldFit ff = fit_far_field(res.state.phi, 0.5, sp.kappa());
            std::string status = res.locked ? "locked" : "not locked";
            if (!ff.locked) status += "; " + ff.warning;
            r.cells = {num(e), num(res.omega), num(res.omega_spread), res.locked ? "1" : "0", num(ff.k_plus), num(ff.k_minus),
                       num(ff.c_g_plus), num(s.t_end), text(status)};
        } catch (const BlowupError& ex) {
            r.blowup = true;
            r.cells = {num(e), "nan", "nan", "0", "nan", "nan", "nan", num(ex.last_stable_time),
                       text(std::string("blowup: ") + ex.what())};
        }
        return r;
    });
    Csv csv(ctx.out / "simulate.csv",
            {"epsilon [1] forcing amplitude eps", "omega [1/time] locked frequency shift", "omega_spread [1] relative variation over the final window",
             "locked [bool] frequency locked", "k_plus [1/length] far-field wavenumber at +infinity",
             "k_minus [1/length] far-field wavenumber at -infinity", "c_g_plus [length/time] group velocity at +infinity",
             "t_end [time] run length or last stable time", "status [text] outcome"});
    bool blew = false;
    for (const auto& r : rows) {
        csv.row(r.cells);
        blew = blew || r.blowup;
    }
    write_script(ctx.out / "plot_simulate.py",
                 "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
                 "for name in sorted(glob.glob(os.path.join(here, \"simulate_*_series.csv\"))):\n"
                 "    d = load(os.path.basename(name))\n"
                 "    label = os.path.basename(name)[9:-11]\n"
                 "    ax[0].plot(floats(d[\"t\"]), floats(d[\"omega_estimate\"]), label=label)\n"
                 "    ax[1].plot(floats(d[\"t\"]), floats(d[\"k_plus\"]), label=label)\n"
                 "ax[0].set_xlabel(\"t\"); ax[0].set_ylabel(\"omega estimate\"); ax[0].legend()\n"
                 "ax[1].set_xlabel(\"t\"); ax[1].set_ylabel(\"k_plus\")\n"
                 "fig.tight_layout(); fig.savefig(os.path.join(here, \"simulate.png\"), dpi=120)\n");
    return blew ? blowup : ok;
}

inline int cmd_oracle(const Context& ctx)
{
    const RunConfig& c = ctx.cfg;
    const Grid g(c.half_width, c.n_points);
    const Inhomogeneity inh = make_inhomogeneity(c.g, g);
    check_sign_condition(c.epsilon, inh.g0, c.allow_wrong_sign);
    emit_warnings(ctx, resolution_warnings(c));
    if (c.model == Model::nonlocal) *ctx.log << "warning: the bound-state oracle describes the local model only\n";
    if (!(c.oracle.h > 0.0)) throw ConfigError("oracle.h must be positive");
    const auto results = parallel_map<OracleResult>(c.epsilon.size(), c.jobs, [&](std::size_t i) {
        return cole_hopf_oracle(inh, c.epsilon[i], c.oracle);
    });
    Csv csv(ctx.out / "oracle.csv",
            {"epsilon [1] forcing amplitude eps", "E0 [1/length^2] ground-state energy of -d^2/dx^2 + eps g",
             "omega [1/time] local pacemaker frequency -E0", "decay_rate [1/length] sqrt(-E0) equal to k",
             "half_width [length] final box half width", "bound [bool] bound state found", "note [text] warnings"});
    for (std::size_t i = 0; i < results.size(); ++i) {
        const OracleResult& r = results[i];
        csv.row({num(c.epsilon[i]), num(r.E0), num(r.omega), num(r.decay_rate), num(r.half_width), r.bound ? "1" : "0",
                 text(r.warning)});
        if (c.snapshot && r.bound) {
            Csv e(ctx.out / ("oracle_" + eps_tag(c.epsilon[i]) + "_eigenfunction.csv"),
                  {"x [length] position", "u [1/sqrt(length)] normalized ground state"});
            for (std::size_t j = 0; j < r.x.size(); ++j) e.row({num(r.x[j]), num(r.eigenfunction[j])});
        }
    }
    write_script(ctx.out / "plot_oracle.py",
                 "d = load(\"oracle.csv\")\n"
                 "fig, ax = plt.subplots(figsize=(4.5, 3.5))\n"
                 "ax.loglog(floats(d[\"epsilon\"]), floats(d[\"omega\"]), \"o-\")\n"
                 "ax.set_xlabel(\"eps\"); ax.set_ylabel(\"omega = -E0\")\n"
                 "fig.tight_layout(); fig.savefig(os.path.join(here, \"oracle.png\"), dpi=120)\n");
    return ok;
}

inline int cmd_verify(const Context& ctx, std::ostream& out)
{
    RunConfig c = ctx.cfg;
    const Grid g(c.half_width, c.n_points);
    const Inhomogeneity inh = make_inhomogeneity(c.g, g);
    check_sign_condition(c.verify.sweep, inh.g0, c.allow_wrong_sign);
    check_sign_condition(c.verify.oracle_eps, inh.g0, c.allow_wrong_sign);
    const auto warnings = resolution_warnings(c);
    emit_warnings(ctx, warnings);
    Verifier v(c.verify);
    const std::map<std::string, std::function<CriterionResult()>> table{
        {"A1", [] { return criterion_a1(); }},      {"A2", [] { return criterion_a2(); }},
        {"A3", [] { return criterion_a3(); }},      {"A4", [&] { return criterion_a4(v); }},
        {"A5", [&] { return criterion_a5(v); }},    {"A6", [&] { return criterion_a6(v); }},
        {"A7", [&] { return criterion_a7(v); }},    {"A8", [&] { return criterion_a8(v); }},
        {"A9", [&] { return criterion_a9(v); }},    {"A10", [&] { return criterion_a10(v); }}};
    static const std::vector<std::string> order{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"};
    std::map<std::string, CriterionResult> results;
    for (const auto& id : order) {
        if (std::find(c.criteria.begin(), c.criteria.end(), id) == c.criteria.end()) continue;
        const CriterionResult r = table.at(id)();
        out << (r.pass ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << std::fixed;
        out.precision(2);
        out << r.seconds << " s): ";
        out.unsetf(std::ios::floatfield);
        out.precision(6);
        out << r.detail << "\n";
        out.flush();
        results[id] = r;
    }
    const auto status = [&](const std::string& id) {
        const auto it = results.find(id);
        return it == results.end() ? std::string("skipped") : std::string(it->second.pass ? "PASS" : "FAIL");
    };
    std::string joined;
    for (const auto& w : warnings) joined += (joined.empty() ? "" : "; ") + w;

    std::vector<std::string> header{"model [text] evolution equation", "epsilon [1] forcing amplitude eps",
                                    "k_plus [1/length] simulated far-field wavenumber at +infinity",
                                    "k_minus [1/length] simulated far-field wavenumber at -infinity",
                                    "k_ansatz [1/length] corrected asymptotic wavenumber k",
                                    "k_linear [1/length] leading-order prediction k'(0) eps",
                                    "omega_sim [1/time] simulated locked frequency shift",
                                    "omega_oracle [1/time] bound-state frequency -E0 (local only)",
                                    "omega_ansatz [1/time] corrected asymptotic frequency kappa k^2",
                                    "omega_dispersion [1/time] kappa k_plus^2 from the simulated slope",
                                    "residual [1] steady residual of the corrected ansatz", "locked [bool] simulation locked"};
    for (const auto& id : order) header.push_back(id + " [status] criterion outcome");
    header.push_back("warnings [text] resolution and setup warnings");
    Csv csv(ctx.out / "verify_report.csv", header);
    for (const SweepPoint& p : v.cached_points()) {
        if (p.n != c.verify.sim_n) continue;
        std::string oracle = "nan";
        if (p.model == Model::local) oracle = num(cole_hopf_oracle(inh, p.eps, c.oracle).omega);
        const double kappa = v.kappa(p.model);
        std::vector<std::string> row{to_string(p.model), num(p.eps), num(p.far.k_plus), num(p.far.k_minus),
                                     p.corrector_ok ? num(p.ansatz.k) : "nan", num(v.predicted_slope(p.model) * p.eps),
                                     p.sim_ok ? num(p.sim.omega) : "nan", oracle, p.corrector_ok ? num(p.ansatz.omega) : "nan",
                                     num(kappa * p.far.k_plus * p.far.k_plus), p.corrector_ok ? num(p.state.steady_residual) : "nan",
                                     p.sim.locked ? "1" : "0"};
        for (const auto& id : order) row.push_back(status(id));
        std::string w = joined;
        if (!p.error.empty()) w += (w.empty() ? "" : "; ") + p.error;
        if (p.sim_ok && !p.far.locked) w += (w.empty() ? "" : "; ") + p.far.warning;
        row.push_back(text(w));
        csv.row(row);
    }
    Csv crit(ctx.out / "verify_criteria.csv",
             {"id [text] criterion", "title [text] checked property", "status [text] PASS or FAIL", "detail [text] measured versus target"});
    for (const auto& id : order) {
        const auto it = results.find(id);
        if (it == results.end()) continue;
        crit.row({id, text(it->second.title), status(id), text(it->second.detail)});
    }
    for (const auto& w : warnings) crit.row({"warning", "setup", "WARN", text(w)});
    write_script(ctx.out / "plot_verify.py",
                 "d = load(\"verify_report.csv\")\n"
                 "fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))\n"
                 "for m in sorted(set(d[\"model\"])):\n"
                 "    idx = [i for i, v in enumerate(d[\"model\"]) if v == m]\n"
                 "    e = [float(d[\"epsilon\"][i]) for i in idx]\n"
                 "    ax[0].plot(e, [float(d[\"k_plus\"][i]) for i in idx], \"o\", label=m + \" simulation\")\n"
                 "    ax[0].plot(e, [float(d[\"k_ansatz\"][i]) for i in idx], \"x\", label=m + \" ansatz\")\n"
                 "    ax[0].plot(e, [float(d[\"k_linear\"][i]) for i in idx], \"--\", label=m + \" k'(0) eps\")\n"
                 "    ax[1].loglog(e, [float(d[\"omega_sim\"][i]) for i in idx], \"o-\", label=m)\n"
                 "ax[0].set_xlabel(\"eps\"); ax[0].set_ylabel(\"k\"); ax[0].legend(fontsize=7)\n"
                 "ax[1].set_xlabel(\"eps\"); ax[1].set_ylabel(\"omega\"); ax[1].legend()\n"
                 "fig.tight_layout(); fig.savefig(os.path.join(here, \"verify.png\"), dpi=120)\n");
    std::size_t failed = 0;
    for (const auto& [id, r] : results)
        if (!r.pass) ++failed;
    out << results.size() - failed << " of " << results.size() << " criteria passed\n";
    return failed ? criterion_failure : ok;
}

} // namespace pacemaker::cli
