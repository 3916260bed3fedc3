#include "socnav/observation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace socnav {

std::array<double, RotatedObservation::kSize> RotatedObservation::to_array() const {
    return {goal_distance, robot_vx, robot_vy, robot_radius, robot_v_pref, robot_theta, ped_px,
            ped_py,        ped_vx,   ped_vy,   ped_radius,   ped_distance, combined_radius};
}

RotatedObservation rotate_observation(const AgentFullState& robot, const PedestrianObservable& ped,
                                      HeadingMode heading) {
    const double dgx = robot.gx - robot.px;
    const double dgy = robot.gy - robot.py;
    const double phi = std::atan2(dgy, dgx);  // atan2(0, 0) == 0
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double rel_x = ped.px - robot.px;
    const double rel_y = ped.py - robot.py;

    RotatedObservation o;
    o.goal_distance = std::sqrt(dgx * dgx + dgy * dgy);
    o.robot_vx = robot.vx * c + robot.vy * s;
    o.robot_vy = robot.vy * c - robot.vx * s;
    o.robot_radius = robot.radius;
    o.robot_v_pref = robot.v_pref;
    o.robot_theta = heading == HeadingMode::WorldFrame ? robot.theta : robot.theta - phi;
    o.ped_px = rel_x * c + rel_y * s;
    o.ped_py = rel_y * c - rel_x * s;
    o.ped_vx = ped.vx * c + ped.vy * s;
    o.ped_vy = ped.vy * c - ped.vx * s;
    o.ped_radius = ped.radius;
    o.ped_distance = std::sqrt(rel_x * rel_x + rel_y * rel_y);
    o.combined_radius = robot.radius + ped.radius;
    return o;
}

std::vector<double> track_features(const TrackHistory& history, int t) {
    if (t < 1 || t > 20) throw std::invalid_argument("track feature window must be in [1, 20], got " + std::to_string(t));
    const std::size_t needed = static_cast<std::size_t>(t) + 1;
    if (history.size() < needed)
        throw std::invalid_argument("track history has " + std::to_string(history.size()) + " positions; " +
                                    std::to_string(needed) + " needed for t = " + std::to_string(t));
    const std::size_t first = history.size() - needed;
    std::vector<double> features(2 * static_cast<std::size_t>(t), 0.0);
    for (int k = 0; k < t; ++k) {
        const auto& a = history[first + k];
        const auto& b = history[first + k + 1];
        features[k] = norm(b.position - a.position) / (b.stamp - a.stamp);
    }
    for (int k = 1; k < t; ++k) {
        const double step = history[first + k + 1].stamp - history[first + k].stamp;
        features[t + k] = (features[k] - features[k - 1]) / step;
    }
    return features;
}

JointState observe(const WorldState& world, std::span<const double> rhos) {
    JointState s;
    s.robot = world.robot;
    s.pedestrians = world.observe_pedestrians();
    if (rhos.empty()) {
        s.rhos.assign(s.pedestrians.size(), 0.0);
    } else {
        if (rhos.size() != s.pedestrians.size()) throw std::invalid_argument("one rho per pedestrian required");
        s.rhos.assign(rhos.begin(), rhos.end());
    }
    return s;
}

JointState propagate_state(const JointState& state, const DiscreteAction& action, double dt) {
    JointState next = state;
    const Vec2 v = action.velocity();
    next.robot.set_velocity(v);
    next.robot.set_position(state.robot.position() + v * dt);
    if (!action.stop) next.robot.theta = action.heading;
    for (auto& p : next.pedestrians) {
        p.px += p.vx * dt;
        p.py += p.vy * dt;
    }
    return next;
}

JointState propagate_state(const WorldState& world, const DiscreteAction& action) {
    return propagate_state(observe(world), action, world.dt);
}

}  // namespace socnav
