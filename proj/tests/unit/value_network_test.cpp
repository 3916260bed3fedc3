#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "socnav/action_space.hpp"
#include "socnav/error.hpp"
#include "socnav/observation.hpp"
#include "socnav/value_network.hpp"

using namespace socnav;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

JointState random_state(Rng& rng, int n) {
    JointState s;
    s.robot.px = rng.uniform(-1, 1);
    s.robot.py = rng.uniform(-4, -2);
    s.robot.vx = rng.uniform(-0.5, 0.5);
    s.robot.vy = rng.uniform(-0.5, 0.5);
    s.robot.gx = 0;
    s.robot.gy = 4;
    s.robot.theta = rng.uniform(-3, 3);
    for (int i = 0; i < n; ++i) {
        s.pedestrians.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-1, 1), rng.uniform(-1, 1), 0.3});
        s.rhos.push_back(rng.uniform());
    }
    return s;
}

// Sum of w_b * V(s_b) over a small batch.
double batch_loss(const ValueNetwork& net, std::span<const ValueInput> inputs, const Eigen::VectorXd& w) {
    return net.values(inputs).dot(w);
}

void check_mlp_gradient(ValueNetwork& net, nn::Mlp& (ValueNetwork::*which)(), const nn::MlpGradients& analytic,
                        std::span<const ValueInput> inputs, const Eigen::VectorXd& w, int stride, const char* label) {
    const double h = 1e-6;
    nn::Mlp& mlp = (net.*which)();
    for (std::size_t l = 0; l < mlp.layer_count(); ++l) {
        const Eigen::Index total = mlp.weight(l).size();
        for (Eigen::Index k = 0; k < total; k += stride) {
            const Eigen::Index i = k % mlp.weight(l).rows(), j = k / mlp.weight(l).rows();
            const double orig = mlp.weight(l)(i, j);
            mlp.mutable_weight(l)(i, j) = orig + h;
            const double fp = batch_loss(net, inputs, w);
            mlp.mutable_weight(l)(i, j) = orig - h;
            const double fm = batch_loss(net, inputs, w);
            mlp.mutable_weight(l)(i, j) = orig;
            ASSERT_LT(rel_err(analytic.weights[l](i, j), (fp - fm) / (2 * h)), 1e-4)
                << label << " layer " << l << " weight (" << i << "," << j << ")";
        }
        for (Eigen::Index i = 0; i < mlp.bias(l).size(); i += std::max(1, stride / 7)) {
            const double orig = mlp.bias(l)(i);
            mlp.mutable_bias(l)(i) = orig + h;
            const double fp = batch_loss(net, inputs, w);
            mlp.mutable_bias(l)(i) = orig - h;
            const double fm = batch_loss(net, inputs, w);
            mlp.mutable_bias(l)(i) = orig;
            ASSERT_LT(rel_err(analytic.biases[l](i), (fp - fm) / (2 * h)), 1e-4) << label << " layer " << l << " bias " << i;
        }
    }
}

}  // namespace

TEST(ActionSpace, CardinalityOrderAndSpeeds) {
    for (double v_pref : {1.0, 0.7, 1.35}) {
        const ActionSpace space(v_pref);
        ASSERT_EQ(space.size(), 81u);
        EXPECT_TRUE(space[0].stop);
        EXPECT_EQ(space[0].velocity(), Vec2{});
        for (std::size_t k = 1; k < space.size(); ++k) {
            const DiscreteAction& a = space[k];
            const int i = 1 + static_cast<int>((k - 1) / 16);
            const int h = static_cast<int>((k - 1) % 16);
            EXPECT_EQ(a.speed_index, i);
            EXPECT_EQ(a.heading_index, h);
            EXPECT_NEAR(a.speed, (std::exp(i / 5.0) - 1.0) / (std::exp(1.0) - 1.0) * v_pref, 1e-12);
            EXPECT_NEAR(a.heading, 2 * std::numbers::pi * h / 16, 1e-12);
            EXPECT_EQ(space.index_of(a), k);
        }
        EXPECT_EQ(space[80].speed, v_pref);
    }
}

TEST(ActionSpace, RejectsForeignActions) {
    const ActionSpace space(1.0);
    DiscreteAction a = space[20];
    a.speed += 1e-3;
    EXPECT_FALSE(space.contains(a));
    EXPECT_THROW(space.index_of(a), InvalidActionError);
}

TEST(Observation, RotationToGoalFrame) {
    AgentFullState robot;
    robot.px = 1;
    robot.py = 1;
    robot.gx = 1;
    robot.gy = 5;  // goal straight up: frame x = world y
    robot.vx = 0.5;
    robot.vy = 0.2;
    robot.theta = 0.3;
    const PedestrianObservable ped{0, 2, 0.1, -0.4, 0.25};
    const RotatedObservation o = rotate_observation(robot, ped);
    EXPECT_NEAR(o.goal_distance, 4.0, 1e-12);
    EXPECT_NEAR(o.robot_vx, 0.2, 1e-12);
    EXPECT_NEAR(o.robot_vy, -0.5, 1e-12);
    EXPECT_NEAR(o.ped_px, 1.0, 1e-12);
    EXPECT_NEAR(o.ped_py, 1.0, 1e-12);
    EXPECT_NEAR(o.ped_vx, -0.4, 1e-12);
    EXPECT_NEAR(o.ped_vy, -0.1, 1e-12);
    EXPECT_NEAR(o.ped_distance, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(o.combined_radius, 0.55, 1e-12);
    EXPECT_NEAR(o.robot_theta, 0.3, 1e-12);
    EXPECT_NEAR(rotate_observation(robot, ped, HeadingMode::GoalRelative).robot_theta, 0.3 - std::numbers::pi / 2, 1e-12);
}

TEST(Observation, PropagateKeepsPedestrianVelocities) {
    Rng rng(1);
    const JointState s = random_state(rng, 3);
    const ActionSpace space(1.0);
    const JointState n = propagate_state(s, space[37], 0.25);
    EXPECT_NEAR(n.robot.px, s.robot.px + space[37].velocity().x * 0.25, 1e-12);
    EXPECT_EQ(n.robot.velocity(), space[37].velocity());
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(n.pedestrians[i].px, s.pedestrians[i].px + s.pedestrians[i].vx * 0.25, 1e-12);
        EXPECT_EQ(n.pedestrians[i].velocity(), s.pedestrians[i].velocity());
    }
    EXPECT_EQ(n.rhos, s.rhos);
}

TEST(Observation, TrackFeatures) {
    TrackHistory h(0.25);
    const double xs[] = {0.0, 0.25, 0.75, 1.0};
    for (int k = 0; k < 4; ++k) h.push(k * 0.25, {xs[k], 0});
    const auto f = track_features(h, 3);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_NEAR(f[0], 1.0, 1e-12);
    EXPECT_NEAR(f[1], 2.0, 1e-12);
    EXPECT_NEAR(f[2], 1.0, 1e-12);
    EXPECT_NEAR(f[3], 0.0, 1e-12);
    EXPECT_NEAR(f[4], 4.0, 1e-12);
    EXPECT_NEAR(f[5], -4.0, 1e-12);
    EXPECT_THROW(track_features(h, 4), std::invalid_argument);
    EXPECT_THROW(track_features(h, 0), std::invalid_argument);
}

TEST(ValueInput, RhoColumnFollowsFlag) {
    Rng rng(2);
    const JointState s = random_state(rng, 4);
    const ValueInput with = make_value_input(s, true), without = make_value_input(s, false);
    ASSERT_EQ(with.peds.rows(), kPedInputWidth);
    ASSERT_EQ(with.pedestrian_count(), 4u);
    for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(with.peds(13, i), s.rhos[i]);
        EXPECT_EQ(without.peds(13, i), 0.0);
    }
}

TEST(ValueNetwork, LayerShapes) {
    EXPECT_EQ(ValueNetwork::mlp2_spec().widths, (std::vector<int>{14, 150, 100}));
    EXPECT_TRUE(ValueNetwork::mlp2_spec().output_relu);
    EXPECT_EQ(ValueNetwork::mlp3_spec().widths, (std::vector<int>{100, 100, 50}));
    EXPECT_EQ(ValueNetwork::mlp4_spec().widths, (std::vector<int>{200, 100, 100, 1}));
    EXPECT_EQ(ValueNetwork::mlp5_spec().widths, (std::vector<int>{56, 150, 100, 100, 1}));
}

TEST(ValueNetwork, PermutationInvariance) {
    Rng rng(3);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(8));
        JointState s = random_state(rng, n);
        const double v = net.value(make_value_input(s, true));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (int k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.index(k + 1)]);
        JointState p = s;
        for (int i = 0; i < n; ++i) {
            p.pedestrians[i] = s.pedestrians[perm[i]];
            p.rhos[i] = s.rhos[perm[i]];
        }
        EXPECT_LE(std::abs(net.value(make_value_input(p, true)) - v), 1e-9);
    }
}

TEST(ValueNetwork, AttentionWeightsFormDistribution) {
    Rng rng(4);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    const auto w = net.attention_weights(make_value_input(random_state(rng, 5), false));
    ASSERT_EQ(w.size(), 5u);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    for (double x : w) EXPECT_GT(x, 0.0);
}

TEST(ValueNetwork, EmptyCrowdUsesZeroCrowdFeature) {
    Rng rng(5);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    const JointState s = random_state(rng, 0);
    const ValueInput in = make_value_input(s, false);
    nn::Vector x = nn::Vector::Zero(kSelfStateWidth + kCrowdWidth);
    x.head(kSelfStateWidth) = in.self;
    EXPECT_NEAR(net.value(in), net.mlp5().predict(x)(0), 1e-12);
}

TEST(ValueNetwork, BatchedValuesMatchSingle) {
    Rng rng(6);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    std::vector<ValueInput> inputs;
    for (int n : {3, 0, 1, 6}) inputs.push_back(make_value_input(random_state(rng, n), true));
    const Eigen::VectorXd batch = net.values(inputs);
    for (std::size_t b = 0; b < inputs.size(); ++b) EXPECT_NEAR(batch(b), net.value(inputs[b]), 1e-12);
}

TEST(ValueNetwork, BackwardMatchesFiniteDifferences) {
    Rng rng(8);
    ValueNetwork net = ValueNetwork::initialized(rng);
    std::vector<ValueInput> inputs;
    for (int n : {3, 1, 5, 0}) inputs.push_back(make_value_input(random_state(rng, n), true));
    Eigen::VectorXd w(4);
    w << 0.7, -1.3, 0.4, 1.1;
    const auto pass = net.forward(inputs);
    const auto grads = net.backward(pass, w);
    check_mlp_gradient(net, &ValueNetwork::mlp5, grads.mlp5, inputs, w, 13, "mlp5");
    check_mlp_gradient(net, &ValueNetwork::mlp4, grads.mlp4, inputs, w, 17, "mlp4");
    check_mlp_gradient(net, &ValueNetwork::mlp3, grads.mlp3, inputs, w, 11, "mlp3");
    check_mlp_gradient(net, &ValueNetwork::mlp2, grads.mlp2, inputs, w, 7, "mlp2");
}

TEST(ValueNetwork, CheckpointRoundTrip) {
    Rng rng(9);
    const ValueNetwork net = ValueNetwork::initialized(rng);
    const ValueNetwork back = ValueNetwork::from_checkpoint(net.to_checkpoint());
    const ValueInput in = make_value_input(random_state(rng, 4), true);
    EXPECT_EQ(net.value(in), back.value(in));

    nn::Checkpoint bad = net.to_checkpoint();
    bad.nets.pop_back();
    EXPECT_THROW(ValueNetwork::from_checkpoint(bad), ShapeMismatchError);
}
