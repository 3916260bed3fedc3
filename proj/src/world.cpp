#include "socnav/world.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "socnav/error.hpp"

namespace socnav {

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::CircleCrossing: return "circle";
        case ScenarioKind::OutgoingFlow: return "outgoing";
        case ScenarioKind::OncomingFlow: return "oncoming";
        case ScenarioKind::PerpendicularCrossing: return "perpendicular";
        case ScenarioKind::SingleRandomGoal: return "single_random_goal";
        case ScenarioKind::PerpetualRandomGoals: return "perpetual_random_goals";
    }
    return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
    if (name == "circle" || name == "circle_crossing") return ScenarioKind::CircleCrossing;
    if (name == "outgoing" || name == "outgoing_flow") return ScenarioKind::OutgoingFlow;
    if (name == "oncoming" || name == "oncoming_flow") return ScenarioKind::OncomingFlow;
    if (name == "perpendicular" || name == "perpendicular_crossing") return ScenarioKind::PerpendicularCrossing;
    if (name == "single_random_goal" || name == "single") return ScenarioKind::SingleRandomGoal;
    if (name == "perpetual_random_goals" || name == "perpetual") return ScenarioKind::PerpetualRandomGoals;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

std::string_view to_string(EpisodeStatus status) {
    switch (status) {
        case EpisodeStatus::Success: return "success";
        case EpisodeStatus::Collision: return "collision";
        case EpisodeStatus::Timeout: return "timeout";
    }
    return "unknown";
}

std::vector<PedestrianObservable> WorldState::observe_pedestrians() const {
    std::vector<PedestrianObservable> out;
    out.reserve(pedestrians.size());
    for (const auto& p : pedestrians) out.push_back(p.observable());
    return out;
}

std::vector<double> WorldState::rhos() const {
    std::vector<double> out;
    out.reserve(pedestrians.size());
    for (const auto& p : pedestrians) out.push_back(p.rho);
    return out;
}

void WorldState::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("world dt must be positive");
    if (!(sim_time >= 0.0)) throw std::invalid_argument("world sim_time must be non-negative");
    robot.validate();
    for (const auto& p : pedestrians) {
        if (!(p.rho >= 0.0 && p.rho <= 1.0)) throw std::invalid_argument("pedestrian rho outside [0, 1]");
        p.state.validate(false);
    }
}

namespace {

struct Placement {
    Vec2 start;
    Vec2 goal;
};

/// Samples pedestrian start and goal positions per scenario.
Placement sample_placement(ScenarioKind kind, const ScenarioGeometry& g, Rng& rng) {
    switch (kind) {
        case ScenarioKind::CircleCrossing: {
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const Vec2 start{g.circle_radius * std::cos(angle), g.circle_radius * std::sin(angle)};
            return {start, -start};
        }
        case ScenarioKind::OutgoingFlow: {
            const double half = 0.5 * g.room_size;
            const Vec2 start{rng.uniform(-0.5, 0.5) * half, rng.uniform(-0.7, 0.0) * half};
            const Vec2 goal{start.x + rng.uniform(-0.1, 0.1) * half, rng.uniform(0.7, 0.9) * half};
            return {start, goal};
        }
        case ScenarioKind::OncomingFlow: {
            const double half = 0.5 * g.room_size;
            const Vec2 start{rng.uniform(-0.5, 0.5) * half, rng.uniform(0.0, 0.7) * half};
            const Vec2 goal{start.x + rng.uniform(-0.1, 0.1) * half, rng.uniform(-0.9, -0.7) * half};
            return {start, goal};
        }
        case ScenarioKind::PerpendicularCrossing: {
            const double half = 0.5 * g.room_size;
            const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
            const Vec2 start{side * rng.uniform(0.6, 0.9) * half, rng.uniform(-0.4, 0.4) * half};
            const Vec2 goal{-side * rng.uniform(0.6, 0.9) * half, rng.uniform(-0.4, 0.4) * half};
            return {start, goal};
        }
        case ScenarioKind::SingleRandomGoal:
        case ScenarioKind::PerpetualRandomGoals: {
            const double half = 0.5 * g.arena_size;
            const Vec2 start{rng.uniform(-half, half), rng.uniform(-half, half)};
            const Vec2 goal{rng.uniform(-half, half), rng.uniform(-half, half)};
            return {start, goal};
        }
    }
    return {};
}

void robot_endpoints(ScenarioKind kind, const ScenarioGeometry& g, Vec2& start, Vec2& goal) {
    switch (kind) {
        case ScenarioKind::CircleCrossing:
            start = {0.0, -g.circle_radius};
            goal = {0.0, g.circle_radius};
            return;
        case ScenarioKind::OutgoingFlow:
        case ScenarioKind::OncomingFlow:
        case ScenarioKind::PerpendicularCrossing:
            start = {0.0, -0.4 * g.room_size};
            goal = {0.0, 0.4 * g.room_size};
            return;
        case ScenarioKind::SingleRandomGoal:
        case ScenarioKind::PerpetualRandomGoals:
            start = {0.0, -0.45 * g.arena_size};
            goal = {0.0, 0.45 * g.arena_size};
            return;
    }
}

Vec2 random_arena_point(const ScenarioGeometry& g, Rng& rng) {
    const double half = 0.5 * g.arena_size;
    return {rng.uniform(-half, half), rng.uniform(-half, half)};
}

}  // namespace

WorldState generate_scenario(ScenarioKind kind, int n_peds, std::uint64_t seed, const SimConfig& sim,
                             const CrowdSpec& crowd) {
    if (n_peds < 0) throw std::invalid_argument("pedestrian count must be non-negative");
    if (!(crowd.rho_max >= 0.0 && crowd.rho_max <= 1.0)) throw std::invalid_argument("rho_max must lie in [0, 1]");

    WorldState world;
    world.dt = sim.dt;
    world.time_limit = sim.time_limit;
    world.robot_visible = sim.robot_visible;
    world.kind = kind;
    world.geometry = sim.geometry;
    world.goal_rng = Rng::stream(seed, "goals");

    Vec2 robot_start;
    Vec2 robot_goal;
    robot_endpoints(kind, sim.geometry, robot_start, robot_goal);
    world.robot.set_position(robot_start);
    world.robot.set_goal(robot_goal);
    world.robot.radius = sim.robot_radius;
    world.robot.v_pref = sim.robot_v_pref;
    world.robot.theta = std::atan2(robot_goal.y - robot_start.y, robot_goal.x - robot_start.x);

    Rng rng = Rng::stream(seed, "scenario");
    world.pedestrians.reserve(static_cast<std::size_t>(n_peds));
    for (int i = 0; i < n_peds; ++i) {
        Pedestrian ped;
        ped.history = TrackHistory(sim.dt, sim.history_capacity);
        ped.rng = Rng::stream(seed, "pedestrian", static_cast<std::uint64_t>(i));
        ped.policy = crowd.mix.empty() ? crowd.policy : crowd.mix[rng.index(crowd.mix.size())];
        ped.orca = crowd.orca;
        ped.social_force = crowd.social_force;
        ped.state.radius = crowd.radius;
        ped.state.v_pref = crowd.v_pref;
        if (crowd.randomize) {
            ped.state.v_pref = rng.uniform(crowd.v_pref_min, crowd.v_pref_max);
            ped.state.radius = rng.uniform(crowd.radius_min, crowd.radius_max);
            ped.orca.time_horizon = rng.uniform(crowd.horizon_min, crowd.horizon_max);
        }
        ped.rho = ped.policy == PolicyTag::NoisyOrca ? rng.uniform(0.0, crowd.rho_max) : 0.0;
        ped.resample_goal = kind == ScenarioKind::PerpetualRandomGoals;

        bool placed = false;
        for (int attempt = 0; attempt < sim.geometry.max_placement_attempts && !placed; ++attempt) {
            const Placement p = sample_placement(kind, sim.geometry, rng);
            const double r = ped.state.radius;
            bool ok = surface_distance(p.start, r, robot_start, world.robot.radius) > 0.0 &&
                      surface_distance(p.goal, r, robot_goal, world.robot.radius) > 0.0;
            for (const auto& other : world.pedestrians) {
                if (!ok) break;
                ok = surface_distance(p.start, r, other.state.position(), other.state.radius) > 0.0 &&
                     surface_distance(p.goal, r, other.state.goal(), other.state.radius) > 0.0;
            }
            if (ok) {
                ped.state.set_position(p.start);
                ped.state.set_goal(p.goal);
                ped.state.theta = std::atan2(p.goal.y - p.start.y, p.goal.x - p.start.x);
                placed = true;
            }
        }
        if (!placed)
            throw PlacementError("could not place pedestrian " + std::to_string(i) + " of " + std::to_string(n_peds) +
                                 " in scenario '" + std::string(to_string(kind)) + "' without overlap");
        ped.history.push(0.0, ped.state.position());
        world.pedestrians.push_back(std::move(ped));
    }
    return world;
}

std::vector<Vec2> pedestrian_velocities(WorldState& world) {
    const std::size_t n = world.pedestrians.size();
    std::vector<PedestrianObservable> everyone = world.observe_pedestrians();
    if (world.robot_visible) everyone.push_back(world.robot.observable());

    std::vector<Vec2> velocities(n);
    std::vector<PedestrianObservable> neighbors;
    neighbors.reserve(everyone.size());
    for (std::size_t i = 0; i < n; ++i) {
        Pedestrian& ped = world.pedestrians[i];
        neighbors.clear();
        for (std::size_t j = 0; j < everyone.size(); ++j)
            if (j != i) neighbors.push_back(everyone[j]);

        switch (ped.policy) {
            case PolicyTag::Orca: velocities[i] = orca_action(ped.state, neighbors, ped.orca, world.dt); break;
            case PolicyTag::NoisyOrca:
                velocities[i] = noisy_orca_action(ped.state, neighbors, ped.rho, ped.rng, ped.orca, world.dt);
                break;
            case PolicyTag::Linear: velocities[i] = linear_action(ped.state, world.dt); break;
            case PolicyTag::SocialForce:
                velocities[i] = social_force_action(ped.state, neighbors, ped.social_force, world.dt);
                break;
        }
    }
    return velocities;
}

namespace {

/// Velocity and new heading of the robot for a command; validates membership.
Vec2 resolve_command(const AgentFullState& robot, const RobotCommand& command, double& heading) {
    if (const auto* action = std::get_if<DiscreteAction>(&command)) {
        const ActionSpace space(robot.v_pref);
        space.index_of(*action);  // throws when outside the set
        if (!action->stop) heading = action->heading;
        return action->velocity();
    }
    const Vec2 v = std::get<HolonomicVelocity>(command).velocity;
    if (!(std::isfinite(v.x) && std::isfinite(v.y)) || norm(v) > robot.v_pref + 1e-9)
        throw InvalidActionError("free robot velocity exceeds v_pref");
    if (norm_sq(v) > 0.0) heading = std::atan2(v.y, v.x);
    return v;
}

}  // namespace

StepEvents step_environment(WorldState& world, const RobotCommand& command) {
    double heading = world.robot.theta;
    const Vec2 robot_velocity = resolve_command(world.robot, command, heading);
    const std::vector<Vec2> ped_velocities = pedestrian_velocities(world);

    world.robot.set_velocity(robot_velocity);
    world.robot.theta = heading;
    world.robot.set_position(world.robot.position() + robot_velocity * world.dt);

    ++world.step_count;
    world.sim_time = world.step_count * world.dt;

    StepEvents events;
    const std::size_t n = world.pedestrians.size();
    events.collisions.assign(n, false);
    events.goal_arrivals.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        Pedestrian& ped = world.pedestrians[i];
        const Vec2 v = ped_velocities[i];
        ped.state.set_velocity(v);
        if (norm_sq(v) > 0.0) ped.state.theta = std::atan2(v.y, v.x);
        ped.state.set_position(ped.state.position() + v * world.dt);
        ped.history.push(world.sim_time, ped.state.position());

        const double d = surface_distance(world.robot, ped.state);
        events.collisions[i] = d < 0.0;
        events.min_surface_distance = std::min(events.min_surface_distance, d);

        if (norm(ped.state.position() - ped.state.goal()) <= world.geometry.ped_goal_tolerance) {
            events.goal_arrivals[i] = true;
            if (ped.resample_goal) ped.state.set_goal(random_arena_point(world.geometry, world.goal_rng));
        }
    }
    events.robot_reached_goal = goal_surface_distance(world.robot) < 0.0;
    return events;
}

RobotCommand OrcaRobotPolicy::act(const WorldState& world) {
    const auto peds = world.observe_pedestrians();
    OrcaParams params = params_;
    // Pedestrians that cannot see the robot will not share the avoidance.
    if (!world.robot_visible) params.responsibility = 1.0;
    return HolonomicVelocity{orca_action(world.robot, peds, params, world.dt)};
}

Snapshot take_snapshot(const WorldState& world) {
    Snapshot snap;
    snap.step = world.step_count;
    snap.time = world.sim_time;
    snap.robot = world.robot;
    snap.pedestrians.reserve(world.pedestrians.size());
    for (const auto& p : world.pedestrians) snap.pedestrians.push_back({p.observable(), p.policy, p.rho, std::nullopt});
    return snap;
}

EpisodeOutcome run_episode(WorldState world, RobotPolicy& robot_policy, EpisodeMode mode, bool record) {
    EpisodeOutcome outcome;
    robot_policy.reset(world);
    std::vector<bool> in_contact(world.pedestrians.size(), false);

    if (goal_surface_distance(world.robot) < 0.0) {
        outcome.status = EpisodeStatus::Success;
        outcome.reached_goal = true;
        if (record) outcome.trajectory.push_back(take_snapshot(world));
        return outcome;
    }

    while (true) {
        const RobotCommand command = robot_policy.act(world);
        if (record) {
            Snapshot snap = take_snapshot(world);
            if (auto estimates = robot_policy.last_rho_estimates()) {
                for (std::size_t i = 0; i < snap.pedestrians.size() && i < estimates->size(); ++i)
                    snap.pedestrians[i].rho_hat = (*estimates)[i];
            }
            outcome.trajectory.push_back(std::move(snap));
        }

        const StepEvents events = step_environment(world, command);
        bool collided = false;
        for (std::size_t i = 0; i < events.collisions.size(); ++i) {
            if (events.collisions[i]) {
                collided = true;
                if (!in_contact[i]) ++outcome.collision_count;
            }
            in_contact[i] = events.collisions[i];
        }

        bool done = false;
        if (mode == EpisodeMode::Training && collided) {
            outcome.status = EpisodeStatus::Collision;
            done = true;
        } else if (events.robot_reached_goal) {
            outcome.status = EpisodeStatus::Success;
            outcome.reached_goal = true;
            done = true;
        } else if (world.timed_out()) {
            outcome.status = EpisodeStatus::Timeout;
            done = true;
        }
        if (done) break;
    }
    if (record) outcome.trajectory.push_back(take_snapshot(world));
    outcome.steps = world.step_count;
    outcome.duration = world.sim_time;
    return outcome;
}

}  // namespace socnav
