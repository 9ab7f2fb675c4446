#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "verification.hpp"

namespace pacemaker {

struct SimulatorSettings {
    std::size_t n_points = 4096;
    double dt = 0.02;
    double t_end = 400.0;
    double lock_periods = 0.0; // if positive, t_end = max(t_end, lock_periods / omega_predicted)
    Closure closure = Closure::outflow;
    InitialKind initial = InitialKind::zero;
    double initial_k = 0.0;
    std::string initial_file;
    double fit_window = 0.1;
    double output_interval = 1.0;
    double layer_rate = 1.0;
};

struct RunConfig {
    Model model = Model::local;
    double half_width = 60.0;
    std::size_t n_points = 1024;
    InhomogeneityParams g;
    std::string g_table_file;
    KernelParams G, J;
    std::string G_table_file, J_table_file;
    std::vector<double> epsilon{0.05};
    CorrectorOptions corrector;
    double residual_acceptance = 1e-6;
    SimulatorSettings sim;
    OracleOptions oracle;
    VerifySettings verify;
    std::vector<std::string> criteria{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"};
    std::string out_dir = "out";
    bool snapshot = false;
    bool allow_wrong_sign = false;
    int jobs = 1;
    std::filesystem::path base_dir = ".";
};

inline const char* config_template = R"(// Pacemaker run configuration. Every key is optional; the values shown are the defaults.
// Comments are allowed. Unknown keys are rejected.
{
  // "local":    phi_t = phi_xx - phi_x^2 + eps g
  // "nonlocal": phi_t = -phi + G * phi - (J' * phi)^2 + eps g
  "model": "local",

  // Cell-centred grid on [-L, L] used by the corrector and the oracle.
  "grid": {
    "half_width": 60.0,
    "n_points": 1024
  },

  // gaussian:  amplitude * exp(-((x - center) / width)^2)
  // algebraic: amplitude * (1 + ((x - center) / width)^2)^(-decay)
  // table:     amplitude * cubic spline through table_file (two columns: x, value)
  // sigma is the localization exponent of g and must exceed 2.
  "inhomogeneity": {
    "family": "gaussian",
    "amplitude": -1.0,
    "width": 1.0,
    "center": 0.0,
    "decay": 4.0,
    "sigma": 2.5,
    "table_file": ""
  },

  // Kernels of the nonlocal model. gaussian: width is the standard deviation;
  // sech_sq: mass sech^2(x / width) / (2 width); table: spline through table_file.
  // G needs unit mass.
  "kernels": {
    "G": { "family": "gaussian", "width": 1.0, "mass": 1.0, "table_file": "" },
    "J": { "family": "gaussian", "width": 1.0, "mass": 1.0, "table_file": "" }
  },

  // Forcing amplitudes for predict, simulate and oracle. sign(eps) must equal -sign(g0)
  // unless --allow-wrong-sign is given.
  "epsilon": [0.05],

  // Fixed-point corrector: stop when the weighted difference drops below tolerance;
  // rows whose steady residual exceeds residual_acceptance are flagged.
  "corrector": {
    "tolerance": 1e-9,
    "max_iter": 200,
    "sigma": 2.5,
    "residual_acceptance": 1e-6
  },

  // Time stepper. n_points uses the same half_width as the grid block and must be a multiple of 4.
  // lock_periods > 0 extends t_end to lock_periods / omega with omega from the corrector.
  // closure: "outflow" (pacemaker runs) or "wavetrain" (pure affine extrapolation).
  // initial: "zero", "wavetrain" (slope initial_k), "ansatz" (corrected pacemaker), "file" (two columns: x, phi).
  "simulator": {
    "n_points": 4096,
    "dt": 0.02,
    "t_end": 400.0,
    "lock_periods": 0.0,
    "closure": "outflow",
    "initial": "zero",
    "initial_k": 0.0,
    "initial_file": "",
    "fit_window": 0.1,
    "output_interval": 1.0,
    "layer_rate": 1.0
  },

  // Bound-state eigensolve of -u'' + eps g u = E u on a growing box.
  "oracle": {
    "h": 0.05,
    "initial_half_width": 40.0,
    "max_half_width": 50000.0,
    "decay_target": 1e-8
  },

  // Cross-check sweep. Simulations run at sim_n_points with t_end = max(sim_t_min, lock_periods / omega).
  // wrong_sign_epsilon is a magnitude; the run uses the sign of g0.
  "verify": {
    "sweep": [0.025, 0.05, 0.1],
    "oracle_epsilon": [0.05, 0.1, 0.2],
    "sim_half_width": 60.0,
    "sim_n_points": 512,
    "sim_n_points_coarse": 256,
    "sim_dt": 0.2,
    "sim_t_min": 400.0,
    "lock_periods": 12.0,
    "wrong_sign_epsilon": 0.1,
    "self_consistency_epsilon": 0.1,
    "criteria": ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"]
  },

  "output": {
    "dir": "out",
    "snapshot": false
  }
}
)";

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file)
{
    const std::filesystem::path p(file);
    return p.is_absolute() ? p : base / p;
}

// Two numeric columns separated by whitespace or commas; '#' starts a comment; non-numeric lines are skipped.
inline void read_two_columns(const std::filesystem::path& path, std::vector<double>& x, std::vector<double>& y)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (const auto c = line.find('#'); c != std::string::npos) line.erase(c);
        for (char& ch : line)
            if (ch == ',' || ch == ';') ch = ' ';
        std::istringstream is(line);
        double a, b;
        if (is >> a >> b) {
            x.push_back(a);
            y.push_back(b);
        }
    }
    if (x.size() < 4) throw ConfigError("file " + path.string() + " needs at least four (x, value) rows");
}

inline KernelParams parse_kernel(const json& j, const std::string& where, std::string& table_file)
{
    check_keys(j, where, {"family", "width", "mass", "table_file"});
    KernelParams k;
    std::string fam = "gaussian";
    read(j, "family", fam, where);
    if (fam == "gaussian") k.family = KernelFamily::gaussian;
    else if (fam == "sech_sq") k.family = KernelFamily::sech_sq;
    else if (fam == "table") k.family = KernelFamily::table;
    else throw ConfigError("unknown kernel family '" + fam + "' in " + where);
    read(j, "width", k.width, where);
    read(j, "mass", k.mass, where);
    read(j, "table_file", table_file, where);
    return k;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".")
{
    using detail::read;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    c.base_dir = base_dir;
    detail::check_keys(j, "config", {"model", "grid", "inhomogeneity", "kernels", "epsilon", "corrector", "simulator", "oracle",
                                     "verify", "output"});
    std::string model = "local";
    read(j, "model", model, "config");
    if (model == "local") c.model = Model::local;
    else if (model == "nonlocal") c.model = Model::nonlocal;
    else throw ConfigError("model must be 'local' or 'nonlocal'");

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        detail::check_keys(g, "grid", {"half_width", "n_points"});
        read(g, "half_width", c.half_width, "grid");
        read(g, "n_points", c.n_points, "grid");
    }
    if (j.contains("inhomogeneity")) {
        const auto& g = j["inhomogeneity"];
        const std::string w = "inhomogeneity";
        detail::check_keys(g, w, {"family", "amplitude", "width", "center", "decay", "sigma", "table_file"});
        std::string fam = "gaussian";
        read(g, "family", fam, w);
        if (fam == "gaussian") c.g.family = InhomogeneityFamily::gaussian;
        else if (fam == "algebraic") c.g.family = InhomogeneityFamily::algebraic;
        else if (fam == "table") c.g.family = InhomogeneityFamily::table;
        else throw ConfigError("unknown inhomogeneity family '" + fam + "'");
        read(g, "amplitude", c.g.amplitude, w);
        read(g, "width", c.g.width, w);
        read(g, "center", c.g.center, w);
        read(g, "decay", c.g.decay, w);
        read(g, "sigma", c.g.sigma, w);
        read(g, "table_file", c.g_table_file, w);
    }
    if (j.contains("kernels")) {
        const auto& k = j["kernels"];
        detail::check_keys(k, "kernels", {"G", "J"});
        if (k.contains("G")) c.G = detail::parse_kernel(k["G"], "kernels.G", c.G_table_file);
        if (k.contains("J")) c.J = detail::parse_kernel(k["J"], "kernels.J", c.J_table_file);
    }
    read(j, "epsilon", c.epsilon, "config");
    if (j.contains("corrector")) {
        const auto& k = j["corrector"];
        detail::check_keys(k, "corrector", {"tolerance", "max_iter", "sigma", "residual_acceptance"});
        read(k, "tolerance", c.corrector.tolerance, "corrector");
        read(k, "max_iter", c.corrector.max_iter, "corrector");
        read(k, "sigma", c.corrector.sigma, "corrector");
        read(k, "residual_acceptance", c.residual_acceptance, "corrector");
    }
    if (j.contains("simulator")) {
        const auto& s = j["simulator"];
        const std::string w = "simulator";
        detail::check_keys(s, w, {"n_points", "dt", "t_end", "lock_periods", "closure", "initial", "initial_k", "initial_file",
                                  "fit_window", "output_interval", "layer_rate"});
        read(s, "n_points", c.sim.n_points, w);
        read(s, "dt", c.sim.dt, w);
        read(s, "t_end", c.sim.t_end, w);
        read(s, "lock_periods", c.sim.lock_periods, w);
        std::string closure = "outflow", initial = "zero";
        read(s, "closure", closure, w);
        if (closure == "outflow") c.sim.closure = Closure::outflow;
        else if (closure == "wavetrain") c.sim.closure = Closure::wavetrain;
        else throw ConfigError("simulator.closure must be 'outflow' or 'wavetrain'");
        read(s, "initial", initial, w);
        if (initial == "zero") c.sim.initial = InitialKind::zero;
        else if (initial == "wavetrain") c.sim.initial = InitialKind::wavetrain;
        else if (initial == "ansatz") c.sim.initial = InitialKind::ansatz;
        else if (initial == "file") c.sim.initial = InitialKind::custom;
        else throw ConfigError("simulator.initial must be 'zero', 'wavetrain', 'ansatz' or 'file'");
        read(s, "initial_k", c.sim.initial_k, w);
        read(s, "initial_file", c.sim.initial_file, w);
        read(s, "fit_window", c.sim.fit_window, w);
        read(s, "output_interval", c.sim.output_interval, w);
        read(s, "layer_rate", c.sim.layer_rate, w);
    }
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        detail::check_keys(o, "oracle", {"h", "initial_half_width", "max_half_width", "decay_target"});
        read(o, "h", c.oracle.h, "oracle");
        read(o, "initial_half_width", c.oracle.initial_half_width, "oracle");
        read(o, "max_half_width", c.oracle.max_half_width, "oracle");
        read(o, "decay_target", c.oracle.decay_target, "oracle");
    }
    if (j.contains("verify")) {
        const auto& v = j["verify"];
        const std::string w = "verify";
        detail::check_keys(v, w, {"sweep", "oracle_epsilon", "sim_half_width", "sim_n_points", "sim_n_points_coarse", "sim_dt",
                                  "sim_t_min", "lock_periods", "wrong_sign_epsilon", "self_consistency_epsilon", "criteria"});
        read(v, "sweep", c.verify.sweep, w);
        read(v, "oracle_epsilon", c.verify.oracle_eps, w);
        read(v, "sim_half_width", c.verify.sim_L, w);
        read(v, "sim_n_points", c.verify.sim_n, w);
        read(v, "sim_n_points_coarse", c.verify.sim_n_coarse, w);
        read(v, "sim_dt", c.verify.sim_dt, w);
        read(v, "sim_t_min", c.verify.sim_t_min, w);
        read(v, "lock_periods", c.verify.lock_periods, w);
        read(v, "wrong_sign_epsilon", c.verify.wrong_sign_eps, w);
        read(v, "self_consistency_epsilon", c.verify.self_eps, w);
        read(v, "criteria", c.criteria, w);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        detail::check_keys(o, "output", {"dir", "snapshot"});
        read(o, "dir", c.out_dir, "output");
        read(o, "snapshot", c.snapshot, "output");
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

// Loads table files and checks ranges; the verify block inherits model inputs from the top level.
inline void finalize_config(RunConfig& c)
{
    if (c.g.family == InhomogeneityFamily::table) {
        if (c.g_table_file.empty()) throw ConfigError("inhomogeneity.table_file is required for the table family");
        detail::read_two_columns(detail::resolve(c.base_dir, c.g_table_file), c.g.table_x, c.g.table_values);
    }
    if (c.G.family == KernelFamily::table) {
        if (c.G_table_file.empty()) throw ConfigError("kernels.G.table_file is required for the table family");
        detail::read_two_columns(detail::resolve(c.base_dir, c.G_table_file), c.G.table_x, c.G.table_values);
    }
    if (c.J.family == KernelFamily::table) {
        if (c.J_table_file.empty()) throw ConfigError("kernels.J.table_file is required for the table family");
        detail::read_two_columns(detail::resolve(c.base_dir, c.J_table_file), c.J.table_x, c.J.table_values);
    }
    if (c.sim.initial == InitialKind::custom) {
        if (c.sim.initial_file.empty()) throw ConfigError("simulator.initial_file is required for initial = 'file'");
        if (!std::filesystem::exists(detail::resolve(c.base_dir, c.sim.initial_file)))
            throw ConfigError("initial file not found: " + c.sim.initial_file);
    }
    if (!(c.half_width > 0.0)) throw ConfigError("grid.half_width must be positive");
    if (c.n_points < 8 || c.n_points % 4 != 0) throw ConfigError("grid.n_points must be a multiple of 4 and at least 8");
    if (c.sim.n_points < 8 || c.sim.n_points % 4 != 0) throw ConfigError("simulator.n_points must be a multiple of 4 and at least 8");
    if (!(c.corrector.tolerance > 0.0) || c.corrector.max_iter < 1) throw ConfigError("corrector tolerance and max_iter must be positive");
    for (double e : c.epsilon)
        if (!std::isfinite(e)) throw ConfigError("epsilon values must be finite");
    static const std::set<std::string> ids{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"};
    for (const auto& id : c.criteria)
        if (!ids.count(id)) throw ConfigError("unknown criterion '" + id + "'");
    if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");

    c.corrector.allow_wrong_sign = c.allow_wrong_sign;
    c.verify.g = c.g;
    c.verify.G = c.G;
    c.verify.J = c.J;
    c.verify.corrector_L = c.half_width;
    c.verify.corrector_n = c.n_points;
    c.verify.corrector = c.corrector;
    c.verify.corrector.allow_wrong_sign = false;
    c.verify.oracle = c.oracle;
    c.verify.jobs = c.jobs;
}

// Refuses eps with the sign of g0; the corrector has no solution there.
inline void check_sign_condition(const std::vector<double>& eps, double g0, bool allow)
{
    if (allow) return;
    for (double e : eps)
        if (e != 0.0 && e * g0 > 0.0) {
            std::ostringstream os;
            os << "eps = " << e << " violates the sign condition sign(eps) = -sign(g0) with g0 = " << g0
               << "; no pacemaker exists for this sign (pass --allow-wrong-sign to run anyway)";
            throw ConfigError(os.str());
        }
}

inline std::vector<std::string> resolution_warnings(const RunConfig& c)
{
    std::vector<std::string> out;
    auto spacing = [&](const char* what, double L, std::size_t n) {
        const double h = 2.0 * L / static_cast<double>(n);
        if (h > 0.25) {
            std::ostringstream os;
            os << what << " spacing h = " << h << " exceeds 0.25; the unit-width front and kernels are under-resolved";
            out.push_back(os.str());
        }
    };
    spacing("grid", c.half_width, c.n_points);
    spacing("simulator grid", c.half_width, c.sim.n_points);
    spacing("verify simulation grid", c.verify.sim_L, c.verify.sim_n);
    if (c.half_width < 20.0) out.push_back("grid half_width below 20 truncates the front tails and the far-field fit window");
    try {
        const Grid g(c.half_width, c.n_points);
        const Inhomogeneity inh = make_inhomogeneity(c.g, g);
        if (!inh.weighted_stable) out.push_back("weighted norms of g are not stable under grid refinement");
        if (c.model == Model::nonlocal) {
            const Kernel G = make_kernel(c.G, g), J = make_kernel(c.J, g);
            const HypothesisReport h = validate_hypotheses(G, J, inh);
            if (!h.h1) out.push_back("kernel G: " + h.h1_failure);
            if (!h.h2) out.push_back("kernel J: " + h.h2_failure);
            if (!h.h3) out.push_back("inhomogeneity: " + h.h3_failure);
            if (G.tail_mass > 1e-10 || J.tail_mass > 1e-10) out.push_back("kernel mass outside [-L, L] exceeds 1e-10");
        }
    } catch (const std::exception& e) {
        out.push_back(std::string("model setup: ") + e.what());
    }
    return out;
}

} // namespace pacemaker
