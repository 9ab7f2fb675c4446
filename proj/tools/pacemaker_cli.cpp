#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pacemaker/cli.hpp"

using namespace pacemaker;

namespace {

std::vector<double> parse_list(std::string s)
{
    for (char& c : s)
        if (c == ',' || c == ';' || c == '[' || c == ']') c = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw ConfigError("--epsilon: cannot parse '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pacemaker solutions of viscous eikonal equations: asymptotics, simulation, oracle and verification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, eps_list;
    bool allow_wrong_sign = false, snapshot = false, cokernel = false;
    int jobs = 1;
    app.add_option("--config", config_path, "JSON run configuration (see 'init')");
    app.add_option("--out", out_dir, "output directory, overrides output.dir");
    auto* eps_opt = app.add_option("--epsilon", eps_list, "comma-separated eps list, overrides the config list");
    app.add_flag("--allow-wrong-sign", allow_wrong_sign, "run eps with sign(eps) = sign(g0)");
    app.add_flag("--snapshot", snapshot, "write (x, phi) profiles per run");
    app.add_option("--jobs", jobs, "worker threads for eps sweeps")->check(CLI::PositiveNumber);

    auto* init = app.add_subcommand("init", "write the configuration template with all defaults");
    auto* predict = app.add_subcommand("predict", "asymptotic pacemaker: k, phi0, omega per eps");
    predict->add_flag("--cokernel", cokernel, "dump psi1*, psi2* at b = k as two-column text");
    auto* simulate = app.add_subcommand("simulate", "time-dependent simulation per eps");
    auto* oracle = app.add_subcommand("oracle", "bound-state frequency of the local model per eps");
    auto* verify = app.add_subcommand("verify", "full cross-check sweep with acceptance criteria");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::config_error;
    }

    try {
        if (init->parsed()) return cli::cmd_init(config_path, std::cout);

        cli::Context ctx;
        ctx.cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
        ctx.cfg.allow_wrong_sign = allow_wrong_sign;
        ctx.cfg.snapshot = ctx.cfg.snapshot || snapshot;
        ctx.cfg.jobs = jobs;
        if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
        if (eps_opt->count()) {
            const auto eps = parse_list(eps_list);
            (verify->parsed() ? ctx.cfg.verify.sweep : ctx.cfg.epsilon) = eps;
        }
        finalize_config(ctx.cfg);
        ctx.out = ctx.cfg.out_dir;
        ctx.dump_cokernel = cokernel;
        std::filesystem::create_directories(ctx.out);

        if (predict->parsed()) return cli::cmd_predict(ctx);
        if (simulate->parsed()) return cli::cmd_simulate(ctx);
        if (oracle->parsed()) return cli::cmd_oracle(ctx);
        if (verify->parsed()) return cli::cmd_verify(ctx, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const KernelError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const GridMismatchError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const SignConditionError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return cli::config_error;
    } catch (const BlowupError& e) {
        std::cerr << "numerical blowup: " << e.what() << " (last stable t = " << e.last_stable_time << ")\n";
        return cli::blowup;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::criterion_failure;
    }
    return cli::ok;
}
