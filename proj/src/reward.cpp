#include "socnav/reward.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace socnav {

void RewardParams::validate() const {
    if (!(k_succ > 0.0)) throw std::invalid_argument("k_succ must be positive");
    if (!(k_coll < 0.0)) throw std::invalid_argument("k_coll must be negative");
    if (!(k_disc > 0.0)) throw std::invalid_argument("k_disc must be positive");
    if (!(slope >= 0.0) || !(intercept >= 0.0)) throw std::invalid_argument("discomfort slope/intercept must be >= 0");
    if (!(d_disc_const >= 0.0)) throw std::invalid_argument("discomfort distance must be >= 0");
}

double discomfort_distance(double rho, const RewardParams& params) { return params.slope * rho + params.intercept; }

double default_reward(double goal_distance, std::span<const double> ped_distances, const RewardParams& params) {
    double r = params.k_succ * heaviside(-goal_distance);
    for (const double d : ped_distances) {
        r += params.k_coll * heaviside(-d);
        r += params.k_disc * std::min(0.0, d - params.d_disc_const);
    }
    return r;
}

double modified_reward(double goal_distance, std::span<const double> ped_distances, std::span<const double> rhos,
                       const RewardParams& params) {
    if (rhos.size() != ped_distances.size()) throw std::invalid_argument("one rho per pedestrian distance required");
    double r = params.k_succ * heaviside(-goal_distance);
    for (std::size_t i = 0; i < ped_distances.size(); ++i) {
        const double d = ped_distances[i];
        r += params.k_coll * heaviside(-d);
        r += params.k_disc * std::min(0.0, d - discomfort_distance(rhos[i], params));
    }
    return r;
}

std::string_view to_string(RewardVariant variant) {
    return variant == RewardVariant::Default ? "default" : "modified";
}

RewardVariant parse_reward_variant(std::string_view name) {
    if (name == "default") return RewardVariant::Default;
    if (name == "modified") return RewardVariant::Modified;
    throw std::invalid_argument("unknown reward variant '" + std::string(name) + "'");
}

double RewardFunction::operator()(double goal_distance, std::span<const double> ped_distances,
                                  std::span<const double> rhos) const {
    if (variant_ == RewardVariant::Modified) return modified_reward(goal_distance, ped_distances, rhos, params_);
    return default_reward(goal_distance, ped_distances, params_);
}

}  // namespace socnav
