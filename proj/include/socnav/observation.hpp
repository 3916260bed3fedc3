#pragma once

#include <array>
#include <span>
#include <vector>

#include "socnav/action_space.hpp"
#include "socnav/agent.hpp"
#include "socnav/track_history.hpp"
#include "socnav/world.hpp"

namespace socnav {

/// Robot-centric view of one (robot, pedestrian) pair. The frame's x axis
/// points from the robot toward its goal.
struct RotatedObservation {
    static constexpr std::size_t kSize = 13;

    double goal_distance = 0.0;
    double robot_vx = 0.0, robot_vy = 0.0;
    double robot_radius = 0.0;
    double robot_v_pref = 0.0;
    double robot_theta = 0.0;
    double ped_px = 0.0, ped_py = 0.0;
    double ped_vx = 0.0, ped_vy = 0.0;
    double ped_radius = 0.0;
    double ped_distance = 0.0;
    double combined_radius = 0.0;

    std::array<double, kSize> to_array() const;
};

/// Heading handling for the theta field: the literal mapping copies the world
/// heading through; the relative mapping subtracts the goal angle.
enum class HeadingMode { WorldFrame, GoalRelative };

RotatedObservation rotate_observation(const AgentFullState& robot, const PedestrianObservable& ped,
                                      HeadingMode heading = HeadingMode::WorldFrame);

/// [speed_1..speed_t, accel_1..accel_t] from the last t + 1 positions, oldest first.
/// accel_1 is 0; later accelerations are consecutive speed differences over dt.
/// Throws std::invalid_argument when t is outside [1, 20] or the history is too short.
std::vector<double> track_features(const TrackHistory& history, int t);

/// What the robot knows at one instant: itself, the pedestrians' observable
/// states and the deviation value attached to each of them.
struct JointState {
    AgentFullState robot;
    std::vector<PedestrianObservable> pedestrians;
    std::vector<double> rhos;
};

JointState observe(const WorldState& world, std::span<const double> rhos = {});

/// One-step prediction: robot moves with the commanded velocity, pedestrians keep
/// their current velocity. No policy is queried.
JointState propagate_state(const JointState& state, const DiscreteAction& action, double dt);
JointState propagate_state(const WorldState& world, const DiscreteAction& action);

}  // namespace socnav
