#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "socnav/error.hpp"
#include "socnav/value_policy.hpp"

using namespace socnav;

namespace {

JointState simple_state() {
    JointState s;
    s.robot.px = 0;
    s.robot.py = -4;
    s.robot.gx = 0;
    s.robot.gy = 4;
    s.pedestrians.push_back({0.0, -3.2, 0.0, 0.0, 0.3});
    s.rhos.push_back(0.4);
    return s;
}

}  // namespace

TEST(Lookahead, StepDiscount) {
    LookaheadConfig c;
    EXPECT_DOUBLE_EQ(c.step_discount(0.25, 1.0), 0.9);
    c.normalized_discount = true;
    EXPECT_NEAR(c.step_discount(0.25, 1.0), std::pow(0.9, 0.25), 1e-15);
}

TEST(Lookahead, ScoresAreRewardPlusDiscountedValue) {
    const JointState s = simple_state();
    const ActionSpace space(1.0);
    LookaheadConfig config;
    config.reward = RewardFunction(RewardVariant::Modified, {});
    // Oracle value: negative distance to the goal of each candidate.
    const ValueOracle oracle = [](std::span<const JointState> states) {
        Eigen::VectorXd v(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) v(i) = -norm(states[i].robot.position() - states[i].robot.goal());
        return v;
    };
    const LookaheadResult r = select_action(s, 0.25, space, config, oracle);
    ASSERT_EQ(r.scores.size(), 81u);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const JointState n = propagate_state(s, space[i], 0.25);
        const double expected = state_reward(n, config.reward) - 0.9 * norm(n.robot.position() - n.robot.goal());
        EXPECT_NEAR(r.scores[i], expected, 1e-12);
    }
    const auto it = std::max_element(r.scores.begin(), r.scores.end());
    EXPECT_EQ(r.index, static_cast<std::size_t>(it - r.scores.begin()));
    EXPECT_EQ(r.action, space[r.index]);
}

TEST(Lookahead, TiesGoToFirstAction) {
    JointState s = simple_state();
    s.pedestrians.clear();
    s.rhos.clear();
    const ActionSpace space(1.0);
    const ValueOracle flat = [](std::span<const JointState> states) { return Eigen::VectorXd::Zero(states.size()).eval(); };
    EXPECT_EQ(select_action(s, 0.25, space, LookaheadConfig{}, flat).index, 0u);
}

TEST(Lookahead, OracleSizeMismatchThrows) {
    const ActionSpace space(1.0);
    const ValueOracle wrong = [](std::span<const JointState>) { return Eigen::VectorXd::Zero(3).eval(); };
    EXPECT_THROW(select_action(simple_state(), 0.25, space, LookaheadConfig{}, wrong), DimensionError);
}

TEST(Lookahead, NetworkOverloadMatchesOracle) {
    Rng rng(2);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    const ActionSpace space(1.0);
    LookaheadConfig config;
    config.feed_rho = true;
    const JointState s = simple_state();
    const ValueOracle oracle = [&](std::span<const JointState> states) {
        Eigen::VectorXd v(states.size());
        for (std::size_t i = 0; i < states.size(); ++i) v(i) = net.value(make_value_input(states[i], true));
        return v;
    };
    const LookaheadResult a = select_action(net, s, 0.25, space, config);
    const LookaheadResult b = select_action(s, 0.25, space, config, oracle);
    EXPECT_EQ(a.index, b.index);
    for (std::size_t i = 0; i < a.scores.size(); ++i) EXPECT_NEAR(a.scores[i], b.scores[i], 1e-12);
}

TEST(EpsilonGreedy, ZeroAndOneExtremes) {
    const ActionSpace space(1.0);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(epsilon_greedy(space[42], 0.0, rng, space), space[42]);
    int greedy_calls = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = epsilon_greedy_lazy(1.0, rng, space.size(), [&] {
            ++greedy_calls;
            return std::size_t{0};
        });
        EXPECT_LT(k, 81u);
    }
    EXPECT_EQ(greedy_calls, 0);
    EXPECT_THROW(epsilon_greedy_lazy(1.5, rng, 81, [] { return std::size_t{0}; }), std::invalid_argument);
}

TEST(EpsilonGreedy, ExplorationRate) {
    Rng rng(4);
    int greedy = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        epsilon_greedy_lazy(0.3, rng, 81, [&] {
            ++greedy;
            return std::size_t{0};
        });
    EXPECT_NEAR(static_cast<double>(n - greedy) / n, 0.3, 0.015);
}

TEST(RhoSource, ParseRoundTrip) {
    for (auto s : {RhoSource::None, RhoSource::GroundTruth, RhoSource::Estimated})
        EXPECT_EQ(parse_rho_source(to_string(s)), s);
}

TEST(ValueNetworkPolicy, ActsInsideActionSpaceAndReportsRhos) {
    Rng rng(5);
    auto net = std::make_shared<const ValueNetwork>(ValueNetwork::initialized(rng));
    LookaheadConfig config;
    config.feed_rho = true;
    CrowdSpec crowd;
    crowd.policy = PolicyTag::NoisyOrca;
    crowd.rho_max = 0.5;
    const WorldState w = generate_scenario(ScenarioKind::CircleCrossing, 4, 1, {}, crowd);
    ValueNetworkPolicy policy(net, config, RhoSource::GroundTruth);
    policy.reset(w);
    const RobotCommand cmd = policy.act(w);
    ASSERT_TRUE(std::holds_alternative<DiscreteAction>(cmd));
    EXPECT_TRUE(ActionSpace(1.0).contains(std::get<DiscreteAction>(cmd)));
    const auto rhos = policy.last_rho_estimates();
    ASSERT_TRUE(rhos.has_value());
    EXPECT_EQ(*rhos, w.rhos());
}

TEST(ValueNetworkPolicy, EstimatedSourceNeedsBank) {
    Rng rng(6);
    auto net = std::make_shared<const ValueNetwork>(ValueNetwork::initialized(rng));
    EXPECT_THROW(ValueNetworkPolicy(net, LookaheadConfig{}, RhoSource::Estimated), ConfigError);
}
