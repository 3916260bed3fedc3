#include <gtest/gtest.h>

#include <vector>

#include "socnav/reward.hpp"

using namespace socnav;

TEST(Reward, GoalReachedWithEmptyCrowd) {
    EXPECT_DOUBLE_EQ(default_reward(-0.01, {}), 1.0);
    EXPECT_DOUBLE_EQ(modified_reward(-0.01, {}, {}), 1.0);
}

TEST(Reward, CollisionAndDiscomfortBothFire) {
    const std::vector<double> d{-0.01};
    EXPECT_NEAR(default_reward(2.0, d), -0.26375, 1e-12);
}

TEST(Reward, DiscomfortOnly) {
    const std::vector<double> d{0.05};
    EXPECT_NEAR(default_reward(2.0, d), -0.00625, 1e-12);
}

TEST(Reward, RhoDependentDiscomfort) {
    const std::vector<double> d{0.4}, rho{0.3};
    EXPECT_NEAR(modified_reward(2.0, d, rho), -0.0125, 1e-12);
    EXPECT_NEAR(discomfort_distance(0.3), 0.5, 1e-12);
}

TEST(Reward, ZeroRhoReducesToDefaultWithIntercept) {
    RewardParams p;
    p.d_disc_const = 0.2;
    const std::vector<double> d{0.15, 0.5, -0.02}, rho{0.0, 0.0, 0.0};
    EXPECT_NEAR(modified_reward(3.0, d, rho), default_reward(3.0, d, p), 1e-15);
}

TEST(Reward, HeavisideAtZeroIsZero) {
    EXPECT_EQ(heaviside(0.0), 0.0);
    EXPECT_EQ(default_reward(0.0, {}), 0.0);
    const std::vector<double> touching{0.0};
    EXPECT_NEAR(default_reward(1.0, touching), 0.125 * -0.1, 1e-15);
}

TEST(Reward, FarPedestriansCostNothing) {
    const std::vector<double> d{0.5, 2.0};
    EXPECT_EQ(default_reward(1.0, d), 0.0);
}

TEST(Reward, FunctionDispatchesOnVariant) {
    const std::vector<double> d{0.4}, rho{0.3};
    const RewardFunction def, mod(RewardVariant::Modified, {});
    EXPECT_NEAR(def(2.0, d, rho), 0.0, 1e-15);
    EXPECT_NEAR(mod(2.0, d, rho), -0.0125, 1e-12);
    EXPECT_EQ(parse_reward_variant(to_string(RewardVariant::Modified)), RewardVariant::Modified);
}

TEST(Reward, ParamValidation) {
    RewardParams p;
    p.k_coll = 0.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
