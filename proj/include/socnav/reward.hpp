#pragma once

#include <span>
#include <string_view>

namespace socnav {

/// Reward constants; defaults are the published values.
struct RewardParams {
    double k_succ = 1.0;
    double k_coll = -0.25;
    double k_disc = 0.125;
    double d_disc_const = 0.1;  ///< discomfort distance of the default reward (m)
    double slope = 1.0;         ///< a in d_disc(rho) = a rho + b
    double intercept = 0.2;     ///< b (m)

    void validate() const;
};

/// Step function with H(0) = 0.
inline double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// a rho + b.
double discomfort_distance(double rho, const RewardParams& params = {});

/// k_succ H(-d_g) + k_coll sum H(-d_i) + k_disc sum min(0, d_i - d_disc_const).
double default_reward(double goal_distance, std::span<const double> ped_distances, const RewardParams& params = {});

/// Same form with a per-pedestrian discomfort distance a rho_i + b.
double modified_reward(double goal_distance, std::span<const double> ped_distances, std::span<const double> rhos,
                       const RewardParams& params = {});

enum class RewardVariant { Default, Modified };

std::string_view to_string(RewardVariant variant);
RewardVariant parse_reward_variant(std::string_view name);

/// Callable reward selected by variant; ignores rhos for the default variant.
class RewardFunction {
public:
    RewardFunction() = default;
    RewardFunction(RewardVariant variant, RewardParams params) : variant_(variant), params_(params) {
        params_.validate();
    }

    double operator()(double goal_distance, std::span<const double> ped_distances, std::span<const double> rhos) const;

    RewardVariant variant() const { return variant_; }
    const RewardParams& params() const { return params_; }

private:
    RewardVariant variant_ = RewardVariant::Default;
    RewardParams params_;
};

}  // namespace socnav
