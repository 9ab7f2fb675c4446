#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "pacemaker/cli.hpp"

using namespace pacemaker;
namespace fs = std::filesystem;

namespace {

std::string cli_path()
{
    const char* p = std::getenv("PACEMAKER_CLI");
    return p ? p : PACEMAKER_CLI_DEFAULT;
}

fs::path scratch(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("pacemaker_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

struct Result {
    int code;
    std::string err;
};

Result run(const std::string& args, const fs::path& dir)
{
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.string() + "' && '" + cli_path() + "' " + args + " > stdout.txt 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Config, TemplateMatchesDefaults)
{
    const RunConfig t = parse_config(config_template), d = parse_config("{}");
    EXPECT_EQ(t.model, d.model);
    EXPECT_EQ(t.n_points, d.n_points);
    EXPECT_EQ(t.half_width, d.half_width);
    EXPECT_EQ(t.epsilon, d.epsilon);
    EXPECT_EQ(t.sim.n_points, d.sim.n_points);
    EXPECT_EQ(t.sim.dt, d.sim.dt);
    EXPECT_EQ(t.sim.t_end, d.sim.t_end);
    EXPECT_EQ(t.corrector.tolerance, d.corrector.tolerance);
    EXPECT_EQ(t.verify.sweep, d.verify.sweep);
    EXPECT_EQ(t.verify.sim_n, d.verify.sim_n);
    EXPECT_EQ(t.criteria, d.criteria);
    EXPECT_EQ(t.oracle.h, d.oracle.h);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    EXPECT_THROW(parse_config(R"({"grid": {"npoints": 10}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": "quadratic"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"epsilon": "0.1"})"), ConfigError);
    EXPECT_THROW(parse_config("{"), ConfigError);
    RunConfig c = parse_config(R"({"inhomogeneity": {"family": "table", "table_file": "missing.txt"}})");
    EXPECT_THROW(finalize_config(c), ConfigError);
}

TEST(Config, SignCondition)
{
    EXPECT_THROW(check_sign_condition({0.05, -0.05}, -1.0, false), ConfigError);
    EXPECT_NO_THROW(check_sign_condition({0.05, -0.05}, -1.0, true));
    EXPECT_NO_THROW(check_sign_condition({0.0, 0.1}, -1.0, false));
}

TEST(Config, TableFilesAreLoaded)
{
    const fs::path d = scratch("table");
    std::ofstream f(d / "g.txt");
    f << "# x value\n";
    for (int i = -80; i <= 80; ++i) f << 0.1 * i << ", " << -std::exp(-0.01 * i * i) << "\n";
    f.close();
    RunConfig c = parse_config(R"({"inhomogeneity": {"family": "table", "amplitude": 1.0, "table_file": "g.txt"}})", d);
    finalize_config(c);
    ASSERT_EQ(c.g.table_x.size(), 161u);
    const Inhomogeneity g = make_inhomogeneity(c.g, Grid(60.0, 1024));
    EXPECT_NEAR(g.g0, -std::sqrt(std::numbers::pi), 1e-6);
}

TEST(Cli, InitWritesParseableTemplate)
{
    const fs::path d = scratch("init");
    EXPECT_EQ(run("init --config cfg.json", d).code, 0);
    EXPECT_NO_THROW(load_config(d / "cfg.json"));
    EXPECT_EQ(run("init --config cfg.json", d).code, 2);
}

TEST(Cli, PredictDefaultRow)
{
    const fs::path d = scratch("predict");
    ASSERT_EQ(run("predict --out o", d).code, 0);
    const auto rows = read_csv(d / "o" / "predict.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NE(rows[0][0].find("epsilon"), std::string::npos);
    EXPECT_NE(rows[0][1].find("[1/length]"), std::string::npos);
    const double k = std::stod(rows[1][1]);
    EXPECT_NEAR(k, 0.05 * std::sqrt(std::numbers::pi) / 2, 0.04 * 0.0443);
    EXPECT_NEAR(k, 0.042842589, 1e-6);
    EXPECT_EQ(rows[1].back(), "ok");
    EXPECT_TRUE(fs::exists(d / "o" / "plot_predict.py"));
}

TEST(Cli, EmptyEpsilonListGivesHeaderOnly)
{
    const fs::path d = scratch("empty");
    ASSERT_EQ(run("predict --epsilon '' --out o", d).code, 0);
    EXPECT_EQ(read_csv(d / "o" / "predict.csv").size(), 1u);
}

TEST(Cli, WrongSignIsRefused)
{
    const fs::path d = scratch("sign");
    const Result r = run("predict --epsilon -0.05 --out o", d);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("sign condition"), std::string::npos);
    const Result allowed = run("predict --epsilon -0.05,0.05 --allow-wrong-sign --out o", d);
    EXPECT_EQ(allowed.code, 0);
    const auto rows = read_csv(d / "o" / "predict.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NE(rows[1].back().find("failed"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo)
{
    const fs::path d = scratch("errors");
    std::ofstream(d / "bad.json") << R"({"grid": {"n_points": 1022}})";
    EXPECT_EQ(run("predict --config bad.json", d).code, 2);
    EXPECT_EQ(run("predict --config missing.json", d).code, 2);
    EXPECT_EQ(run("predict --epsilon abc", d).code, 2);
    EXPECT_EQ(run("frobnicate", d).code, 2);
}

TEST(Cli, PredictIsDeterministic)
{
    const fs::path d = scratch("determinism");
    ASSERT_EQ(run("predict --epsilon 0.05,0.1 --jobs 2 --snapshot --out a", d).code, 0);
    ASSERT_EQ(run("predict --epsilon 0.05,0.1 --snapshot --out b", d).code, 0);
    for (const char* f : {"predict.csv", "predict_local_eps0.05_profile.csv", "predict_local_eps0.1_profile.csv"})
        EXPECT_EQ(slurp(d / "a" / f), slurp(d / "b" / f)) << f;
}

TEST(Cli, SimulateWritesSeriesAndSnapshots)
{
    const fs::path d = scratch("simulate");
    std::ofstream(d / "c.json") << R"({"grid": {"half_width": 30},
        "simulator": {"n_points": 256, "dt": 0.1, "t_end": 600}})";
    ASSERT_EQ(run("simulate --config c.json --epsilon 0.2 --snapshot --out o", d).code, 0);
    const auto series = read_csv(d / "o" / "simulate_local_eps0.2_series.csv");
    ASSERT_EQ(series.size(), 602u);
    EXPECT_EQ(series[0].size(), 5u);
    const auto snap = read_csv(d / "o" / "simulate_local_eps0.2_snapshot.csv");
    EXPECT_EQ(snap.size(), 257u);
    const auto summary = read_csv(d / "o" / "simulate.csv");
    ASSERT_EQ(summary.size(), 2u);
    EXPECT_NEAR(std::stod(summary[1][1]), 0.024744, 0.024744 * 0.01);
    EXPECT_EQ(summary[1][3], "1");
}

TEST(Cli, SimulateFromInitialFile)
{
    const fs::path d = scratch("initial");
    std::ofstream f(d / "phi0.txt");
    for (int i = -320; i <= 320; ++i) f << 0.1 * i << " " << 0.2 * 0.1 * i << "\n";
    f.close();
    std::ofstream(d / "c.json") << R"({"grid": {"half_width": 30}, "epsilon": [0.0],
        "simulator": {"n_points": 256, "dt": 0.05, "t_end": 50, "initial": "file", "initial_file": "phi0.txt", "closure": "wavetrain"}})";
    ASSERT_EQ(run("simulate --config c.json --out o", d).code, 0);
    const auto summary = read_csv(d / "o" / "simulate.csv");
    EXPECT_NEAR(std::stod(summary[1][1]), 0.04, 0.04 * 0.01);
}

TEST(Cli, BlowupExitsThree)
{
    const fs::path d = scratch("blowup");
    std::ofstream(d / "c.json") << R"({"grid": {"half_width": 30}, "simulator": {"n_points": 256, "dt": 0.1, "t_end": 100}})";
    const Result r = run("simulate --config c.json --epsilon 10000 --out o", d);
    EXPECT_EQ(r.code, 3);
    const auto summary = read_csv(d / "o" / "simulate.csv");
    ASSERT_EQ(summary.size(), 2u);
    EXPECT_NE(summary[1].back().find("blowup"), std::string::npos);
}

TEST(Cli, OracleMatchesPredict)
{
    const fs::path d = scratch("oracle");
    ASSERT_EQ(run("oracle --epsilon 0.1 --snapshot --out o", d).code, 0);
    const auto rows = read_csv(d / "o" / "oracle.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_NEAR(std::stod(rows[1][2]), 0.0069030, 1e-6);
    EXPECT_EQ(rows[1][5], "1");
    EXPECT_TRUE(fs::exists(d / "o" / "oracle_eps0.1_eigenfunction.csv"));
}

TEST(Cli, VerifyPropagatesResolutionWarnings)
{
    const fs::path d = scratch("verify");
    std::ofstream(d / "c.json") << R"({"grid": {"n_points": 64}, "verify": {"criteria": ["A1"]}})";
    const Result r = run("verify --config c.json --out o", d);
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("under-resolved"), std::string::npos);
    const std::string crit = slurp(d / "o" / "verify_criteria.csv");
    EXPECT_NE(crit.find("A1,scalar-product table,PASS"), std::string::npos);
    EXPECT_NE(crit.find("under-resolved"), std::string::npos);
    EXPECT_NE(slurp(d / "stdout.txt").find("PASS A1"), std::string::npos);
}

TEST(Cli, VerifyFailureExitsOne)
{
    const fs::path d = scratch("verify_fail");
    // an absurdly short run length cannot lock the far field
    std::ofstream(d / "c.json") << R"({"verify": {"criteria": ["A9"], "sweep": [0.1], "sim_t_min": 5, "lock_periods": 0.01}})";
    const Result r = run("verify --config c.json --out o", d);
    EXPECT_EQ(r.code, 1);
    const auto rows = read_csv(d / "o" / "verify_report.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][0], "nonlocal");
    EXPECT_EQ(rows[1][20], "FAIL");
}
