#include "socnav/value_policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "socnav/error.hpp"

namespace socnav {

double LookaheadConfig::step_discount(double dt, double v_pref) const {
    return normalized_discount ? std::pow(gamma, dt * v_pref) : gamma;
}

double state_reward(const JointState& next, const RewardFunction& reward) {
    std::vector<double> distances;
    distances.reserve(next.pedestrians.size());
    for (const auto& p : next.pedestrians) distances.push_back(surface_distance(next.robot, p));
    return reward(goal_surface_distance(next.robot), distances, next.rhos);
}

LookaheadResult select_action(const JointState& state, double dt, const ActionSpace& space,
                              const LookaheadConfig& config, const ValueOracle& value) {
    std::vector<JointState> next;
    next.reserve(space.size());
    for (const auto& a : space.actions()) next.push_back(propagate_state(state, a, dt));
    const Eigen::VectorXd v = value(next);
    if (static_cast<std::size_t>(v.size()) != space.size())
        throw DimensionError("value oracle must return one value per candidate state");

    const double discount = config.step_discount(dt, state.robot.v_pref);
    LookaheadResult result;
    result.scores.resize(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        result.scores[i] = state_reward(next[i], config.reward) + discount * v(static_cast<Eigen::Index>(i));
        if (result.scores[i] > result.scores[result.index]) result.index = i;
    }
    result.action = space[result.index];
    return result;
}

LookaheadResult select_action(const ValueNetwork& net, const JointState& state, double dt, const ActionSpace& space,
                              const LookaheadConfig& config) {
    return select_action(state, dt, space, config, [&](std::span<const JointState> states) {
        std::vector<ValueInput> inputs;
        inputs.reserve(states.size());
        for (const auto& s : states) inputs.push_back(make_value_input(s, config.feed_rho, config.heading));
        return net.values(inputs);
    });
}

DiscreteAction select_action(const ValueNetwork& net, const WorldState& world, const RewardFunction& reward,
                             double gamma) {
    LookaheadConfig config;
    config.gamma = gamma;
    config.reward = reward;
    const std::vector<double> rhos = world.rhos();
    return select_action(net, observe(world, rhos), world.dt, ActionSpace(world.robot.v_pref), config).action;
}

std::size_t epsilon_greedy_lazy(double eps, Rng& rng, std::size_t n_actions,
                                const std::function<std::size_t()>& greedy) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (rng.uniform() < eps) return static_cast<std::size_t>(rng.index(n_actions));
    return greedy();
}

DiscreteAction epsilon_greedy(const DiscreteAction& best, double eps, Rng& rng, const ActionSpace& space) {
    std::size_t best_index = 0;
    const std::size_t i = epsilon_greedy_lazy(eps, rng, space.size(), [&] {
        best_index = space.index_of(best);
        return best_index;
    });
    return space[i];
}

std::string_view to_string(RhoSource source) {
    switch (source) {
        case RhoSource::None: return "none";
        case RhoSource::GroundTruth: return "ground_truth";
        case RhoSource::Estimated: return "estimated";
    }
    return "?";
}

RhoSource parse_rho_source(std::string_view name) {
    if (name == "none") return RhoSource::None;
    if (name == "ground_truth" || name == "truth") return RhoSource::GroundTruth;
    if (name == "estimated" || name == "estimate") return RhoSource::Estimated;
    throw ConfigError("unknown rho source '" + std::string(name) + "'");
}

ValueNetworkPolicy::ValueNetworkPolicy(std::shared_ptr<const ValueNetwork> net, LookaheadConfig config,
                                       RhoSource source, std::shared_ptr<const UncertaintyBank> bank,
                                       EstimatorConfig estimator, std::string name)
    : net_(std::move(net)),
      config_(std::move(config)),
      source_(source),
      bank_(std::move(bank)),
      estimator_config_(estimator),
      name_(std::move(name)) {
    if (!net_) throw std::invalid_argument("value network required");
    if (source_ == RhoSource::Estimated && !bank_) throw ConfigError("estimated rho requires an uncertainty bank");
}

void ValueNetworkPolicy::reset(const WorldState& world) {
    estimators_.assign(world.pedestrians.size(), RhoEstimator(estimator_config_));
    last_rhos_.clear();
}

std::vector<double> ValueNetworkPolicy::rhos_for(const WorldState& world) {
    switch (source_) {
        case RhoSource::None: return std::vector<double>(world.pedestrians.size(), 0.0);
        case RhoSource::GroundTruth: return world.rhos();
        case RhoSource::Estimated: break;
    }
    if (estimators_.size() != world.pedestrians.size())
        estimators_.assign(world.pedestrians.size(), RhoEstimator(estimator_config_));
    std::vector<double> rhos(world.pedestrians.size());
    for (std::size_t i = 0; i < rhos.size(); ++i)
        rhos[i] = estimators_[i].update(*bank_, world.pedestrians[i].history).rho;
    return rhos;
}

RobotCommand ValueNetworkPolicy::act(const WorldState& world) {
    last_rhos_ = rhos_for(world);
    last_ = select_action(*net_, observe(world, last_rhos_), world.dt, ActionSpace(world.robot.v_pref), config_);
    return last_.action;
}

std::optional<std::vector<double>> ValueNetworkPolicy::last_rho_estimates() const {
    if (source_ == RhoSource::None || last_rhos_.empty()) return std::nullopt;
    return last_rhos_;
}

}  // namespace socnav
