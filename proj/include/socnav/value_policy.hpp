#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socnav/action_space.hpp"
#include "socnav/observation.hpp"
#include "socnav/reward.hpp"
#include "socnav/rng.hpp"
#include "socnav/uncertainty.hpp"
#include "socnav/value_network.hpp"
#include "socnav/world.hpp"

namespace socnav {

struct LookaheadConfig {
    double gamma = 0.9;
    /// Discount gamma^(dt * v_pref) per step instead of gamma.
    bool normalized_discount = false;
    /// Feed each pedestrian's rho into the value network (otherwise 0).
    bool feed_rho = false;
    HeadingMode heading = HeadingMode::WorldFrame;
    RewardFunction reward;

    double step_discount(double dt, double v_pref) const;
};

/// Reward of arriving in `next` (goal and pedestrian surface distances, rhos from the state).
double state_reward(const JointState& next, const RewardFunction& reward);

struct LookaheadResult {
    std::size_t index = 0;
    DiscreteAction action;
    std::vector<double> scores;  ///< one per action in space order
};

/// Values of a batch of joint states.
using ValueOracle = std::function<Eigen::VectorXd(std::span<const JointState>)>;

/// Scores every action as r(s, a) + discount * V(s') with s' from constant-velocity
/// propagation; the first maximal action in space order wins.
LookaheadResult select_action(const JointState& state, double dt, const ActionSpace& space,
                              const LookaheadConfig& config, const ValueOracle& value);

LookaheadResult select_action(const ValueNetwork& net, const JointState& state, double dt, const ActionSpace& space,
                              const LookaheadConfig& config);

/// Lookahead against the world's current state with ground-truth rhos.
DiscreteAction select_action(const ValueNetwork& net, const WorldState& world, const RewardFunction& reward,
                             double gamma = 0.9);

/// With probability eps a uniformly drawn member of the space, otherwise best.
DiscreteAction epsilon_greedy(const DiscreteAction& best, double eps, Rng& rng, const ActionSpace& space);

/// Same draws as epsilon_greedy, but the greedy action is only computed when needed.
std::size_t epsilon_greedy_lazy(double eps, Rng& rng, std::size_t n_actions,
                                const std::function<std::size_t()>& greedy);

enum class RhoSource { None, GroundTruth, Estimated };

std::string_view to_string(RhoSource source);
RhoSource parse_rho_source(std::string_view name);

/// Greedy robot controller around a trained value network.
class ValueNetworkPolicy final : public RobotPolicy {
public:
    ValueNetworkPolicy(std::shared_ptr<const ValueNetwork> net, LookaheadConfig config, RhoSource source,
                       std::shared_ptr<const UncertaintyBank> bank = nullptr, EstimatorConfig estimator = {},
                       std::string name = "value_network");

    std::string name() const override { return name_; }
    void reset(const WorldState& world) override;
    RobotCommand act(const WorldState& world) override;
    std::optional<std::vector<double>> last_rho_estimates() const override;

    const LookaheadResult& last_result() const { return last_; }

private:
    std::vector<double> rhos_for(const WorldState& world);

    std::shared_ptr<const ValueNetwork> net_;
    LookaheadConfig config_;
    RhoSource source_;
    std::shared_ptr<const UncertaintyBank> bank_;
    std::vector<RhoEstimator> estimators_;
    EstimatorConfig estimator_config_;
    std::string name_;
    std::vector<double> last_rhos_;
    LookaheadResult last_;
};

}  // namespace socnav
