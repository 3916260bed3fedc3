#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "socnav/agent.hpp"
#include "socnav/rng.hpp"

namespace socnav {

enum class PolicyTag { Orca, NoisyOrca, Linear, SocialForce };

std::string_view to_string(PolicyTag tag);

/// Parses the config/log vocabulary: orca, noisy_orca, linear, social_force.
PolicyTag parse_policy_tag(std::string_view name);

struct OrcaParams {
    double time_horizon = 5.0;
    double neighbor_dist = 10.0;
    int max_neighbors = 10;
    /// Share of each pairwise correction this agent takes on; 0.5 is reciprocal.
    double responsibility = 0.5;
    /// Added to the combined radius when building constraints.
    double safety_margin = 0.0;
    /// Solver-only padding on each agent's radius.
    double radius_padding = 0.01;

    void validate() const;
};

struct SocialForceParams {
    double attraction_gain = 1.0;
    double repulsion_amplitude = 2.0;
    double decay_length = 0.4;
    /// Weight of the sidestep term perpendicular to each repulsion direction.
    double lateral_ratio = 0.5;
};

/// Goal-directed velocity at v_pref, shortened so a single step of length dt
/// lands on the goal instead of overshooting it.
Vec2 preferred_velocity(const AgentFullState& self, double dt);

/// One directed line of an ORCA velocity constraint; the feasible side is to the left.
struct OrcaLine {
    Vec2 point;
    Vec2 direction;
};

/// Builds the ORCA half-plane constraint induced by one neighbor.
OrcaLine orca_constraint(const AgentFullState& self, const PedestrianObservable& other, double time_horizon, double dt,
                         double responsibility = 0.5, double safety_margin = 0.0);

/// Velocity of norm <= v_pref closest to the preferred velocity that satisfies
/// every ORCA constraint from the closest max_neighbors within neighbor_dist.
/// Infeasible constraint sets fall back to the minimum-penetration velocity.
Vec2 orca_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors,
                 const OrcaParams& params, double dt);

/// (1 - rho) a_orca + rho a_rand with a_rand ~ N(0, v_pref I). Always consumes two
/// normal draws from rng so that streams stay aligned across rho values.
/// The result is deliberately neither clipped nor collision checked.
Vec2 noisy_orca_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors, double rho,
                       Rng& rng, const OrcaParams& params, double dt);

/// Mixes a precomputed ORCA action with a Gaussian draw.
Vec2 mix_noise(const Vec2& orca_velocity, double rho, double v_pref, Rng& rng);

/// Straight to the goal at v_pref; no avoidance.
Vec2 linear_action(const AgentFullState& self, double dt);

/// Goal attraction plus exponentially decaying repulsion from every neighbor,
/// clamped to v_pref.
Vec2 social_force_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors,
                         const SocialForceParams& params, double dt);

namespace orca_detail {

bool linear_program1(std::span<const OrcaLine> lines, std::size_t line_no, double radius, const Vec2& opt_velocity,
                     bool direction_opt, Vec2& result);
std::size_t linear_program2(std::span<const OrcaLine> lines, double radius, const Vec2& opt_velocity,
                            bool direction_opt, Vec2& result);
void linear_program3(std::span<const OrcaLine> lines, std::size_t begin_line, double radius, Vec2& result);

}  // namespace orca_detail

}  // namespace socnav
