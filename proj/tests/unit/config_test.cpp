#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "socnav/config.hpp"
#include "socnav/error.hpp"

using namespace socnav;
namespace fs = std::filesystem;

TEST(Config, DefaultsMatchLibraryDefaults) {
    const Config c;
    const TrainerConfig t = trainer_config(c);
    EXPECT_EQ(t.hp.gamma, TrainingHyperparams{}.gamma);
    EXPECT_EQ(t.hp.batch, 100u);
    EXPECT_EQ(t.hp.target_update, 50);
    EXPECT_EQ(t.hp.epsilon_decay, 4000);
    EXPECT_EQ(sim_config(c).dt, 0.25);
    EXPECT_EQ(reward_params(c).k_coll, -0.25);
    EXPECT_EQ(benchmark_config(c).metrics.sigma, 0.5);
}

TEST(Config, UnknownKeysAreRejected) {
    Config c;
    EXPECT_THROW(c.apply_override("train.nonsense=1"), ConfigError);
    EXPECT_THROW(c.apply_override("no_equals_sign"), ConfigError);
    std::istringstream in("[bogus]\nx = 1\n");
    EXPECT_THROW(c.merge_stream(in), ConfigError);
}

TEST(Config, StreamSyntax) {
    Config c;
    std::istringstream in("; comment\n[train]\nepisodes = 77  \n# another\n[reward]\nk_disc=0.5\n");
    c.merge_stream(in);
    EXPECT_EQ(c.get_int("train.episodes"), 77);
    EXPECT_EQ(c.get_double("reward.k_disc"), 0.5);
}

TEST(Config, PrecedenceFileEnvOverride) {
    const fs::path file = fs::temp_directory_path() / "socnav_config_test.ini";
    {
        std::ofstream out(file);
        out << "[train]\nepisodes = 10\nlr = 0.5\nbatch = 7\n";
    }
    ::setenv("SOCNAV_TRAIN__LR", "0.25", 1);
    ::setenv("SOCNAV_TRAIN__BATCH", "9", 1);
    const Config c = Config::resolve(file, {"train.batch=11"});
    ::unsetenv("SOCNAV_TRAIN__LR");
    ::unsetenv("SOCNAV_TRAIN__BATCH");
    EXPECT_EQ(c.get_int("train.episodes"), 10);
    EXPECT_EQ(c.get_double("train.lr"), 0.25);
    EXPECT_EQ(c.get_int("train.batch"), 11);
}

TEST(Config, EnvNames) {
    EXPECT_EQ(config_env_name({"train", "lr", "", ""}), "SOCNAV_TRAIN__LR");
}

TEST(Config, WriteThenReadIsIdentity) {
    Config a;
    a.apply_override("eval.trials=33");
    a.apply_override("crowd.rho_max=0.4");
    std::stringstream ss;
    a.write(ss);
    Config b;
    b.merge_stream(ss);
    std::stringstream s2;
    b.write(s2);
    EXPECT_EQ(ss.str(), s2.str());
    EXPECT_EQ(b.get_int("eval.trials"), 33);
}

TEST(Config, TypedGettersValidate) {
    Config c;
    c.set("train.episodes", "many");
    EXPECT_THROW(c.get_int("train.episodes"), ConfigError);
    c.set("sim.robot_visible", "maybe");
    EXPECT_THROW(c.get_bool("sim.robot_visible"), ConfigError);
    c.set("eval.rho_grid", "0.0, 0.25,0.5");
    EXPECT_EQ(c.get_doubles("eval.rho_grid"), (std::vector<double>{0.0, 0.25, 0.5}));
}

TEST(Config, FixedDiscomfortRenamesSarl) {
    Config c;
    c.apply_override("train.variant=sarl");
    c.apply_override("reward.d_disc_const=0.2");
    EXPECT_EQ(trainer_config(c).variant.name, "sarl_d0.20");
    EXPECT_EQ(trainer_config(c).variant.reward_params.d_disc_const, 0.2);
}

TEST(Config, MissingFileIsConfigError) {
    EXPECT_THROW(Config::resolve(fs::path("/nonexistent/socnav.ini"), {}), ConfigError);
}
