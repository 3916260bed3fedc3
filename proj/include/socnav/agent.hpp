#pragma once

#include "socnav/vec2.hpp"

namespace socnav {

/// Position, velocity and radius of a pedestrian as seen by the robot.
struct PedestrianObservable {
    double px = 0.0, py = 0.0;
    double vx = 0.0, vy = 0.0;
    double radius = 0.3;

    Vec2 position() const { return {px, py}; }
    Vec2 velocity() const { return {vx, vy}; }
};

/// Full nine-field agent state: position, velocity, radius, goal, preferred speed, heading.
struct AgentFullState {
    double px = 0.0, py = 0.0;
    double vx = 0.0, vy = 0.0;
    double radius = 0.3;
    double gx = 0.0, gy = 0.0;
    double v_pref = 1.0;
    double theta = 0.0;

    Vec2 position() const { return {px, py}; }
    Vec2 velocity() const { return {vx, vy}; }
    Vec2 goal() const { return {gx, gy}; }

    void set_position(const Vec2& p) {
        px = p.x;
        py = p.y;
    }
    void set_velocity(const Vec2& v) {
        vx = v.x;
        vy = v.y;
    }
    void set_goal(const Vec2& g) {
        gx = g.x;
        gy = g.y;
    }

    PedestrianObservable observable() const { return {px, py, vx, vy, radius}; }

    /// Throws std::invalid_argument when radius or v_pref is not positive,
    /// or, with check_speed, when the speed exceeds v_pref.
    void validate(bool check_speed = true) const;
};

/// Center distance minus both radii; negative means the discs overlap.
inline double surface_distance(const Vec2& a, double radius_a, const Vec2& b, double radius_b) {
    return norm(a - b) - radius_a - radius_b;
}

template <typename A, typename B>
double surface_distance(const A& a, const B& b) {
    return surface_distance(a.position(), a.radius, b.position(), b.radius);
}

/// Goal distance measured from the agent's boundary: ||p - g|| - r.
inline double goal_surface_distance(const AgentFullState& agent) {
    return norm(agent.position() - agent.goal()) - agent.radius;
}

}  // namespace socnav
