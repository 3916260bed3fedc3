#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "socnav/cli.hpp"

namespace fs = std::filesystem;
using socnav::cli::dispatch;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("socnav_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, socnav::cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, socnav::cli::kExitUsage);
    EXPECT_EQ(run({"simulate", "--peds", "many"}).code, socnav::cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, socnav::cli::kExitOk);
}

TEST(Cli, ConfigErrors) {
    const fs::path dir = scratch("cfg");
    EXPECT_EQ(run({"simulate", "-o", dir.string(), "--set", "sim.bogus=1"}).code, socnav::cli::kExitConfig);
    EXPECT_EQ(run({"evaluate", "-o", dir.string(), "-p", "x=/nonexistent.snck"}).code, socnav::cli::kExitConfig);
    EXPECT_EQ(run({"evaluate", "-o", dir.string()}).code, socnav::cli::kExitConfig);
    EXPECT_EQ(run({"simulate", "-c", "/nonexistent.ini"}).code, socnav::cli::kExitConfig);
}

TEST(Cli, SimulateAndPlot) {
    const fs::path dir = scratch("sim");
    const CliRun r = run({"simulate", "-o", dir.string(), "--peds", "3", "--rho-max", "0.4", "-s", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "config.echo"));
    EXPECT_NE(slurp(dir / "config.echo").find("rho_max = 0.4"), std::string::npos);
    const fs::path log = dir / "trajectories" / "episode.jsonl";
    ASSERT_TRUE(fs::exists(log));
    const fs::path svg = dir / "plot.svg";
    EXPECT_EQ(run({"plot", "--log", log.string(), "--output", svg.string()}).code, 0);
    EXPECT_TRUE(fs::exists(svg));
}

TEST(Cli, EvaluateBaselinesIsReproducible) {
    const fs::path a = scratch("eval_a"), b = scratch("eval_b");
    const std::vector<std::string> common{"-p", "orca", "-p", "stop", "-s", "3", "--set", "eval.trials=4"};
    std::vector<std::string> args_a{"evaluate", "-o", a.string()}, args_b{"evaluate", "-o", b.string(), "-j", "2"};
    args_a.insert(args_a.end(), common.begin(), common.end());
    args_b.insert(args_b.end(), common.begin(), common.end());
    ASSERT_EQ(run(args_a).code, 0);
    ASSERT_EQ(run(args_b).code, 0);
    EXPECT_EQ(slurp(a / "report.csv"), slurp(b / "report.csv"));
    EXPECT_TRUE(fs::exists(a / "report.txt"));
    EXPECT_TRUE(fs::exists(a / "report_trials.csv"));
}

TEST(Cli, SweepWritesPerLevelReports) {
    const fs::path dir = scratch("sweep");
    const CliRun r = run({"sweep-noise", "-o", dir.string(), "-p", "orca", "--set", "eval.trials=2", "--set",
                       "eval.rho_grid=0.0,0.3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
    EXPECT_TRUE(fs::exists(dir / "report_rho0.00.csv"));
    EXPECT_TRUE(fs::exists(dir / "report_rho0.30.csv"));
}
