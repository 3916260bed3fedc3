#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "socnav/action_space.hpp"
#include "socnav/agent.hpp"
#include "socnav/ped_policies.hpp"
#include "socnav/rng.hpp"
#include "socnav/track_history.hpp"

namespace socnav {

enum class ScenarioKind {
    CircleCrossing,
    OutgoingFlow,
    OncomingFlow,
    PerpendicularCrossing,
    SingleRandomGoal,
    PerpetualRandomGoals,
};

inline constexpr ScenarioKind kAllScenarios[] = {
    ScenarioKind::CircleCrossing,        ScenarioKind::OutgoingFlow,     ScenarioKind::OncomingFlow,
    ScenarioKind::PerpendicularCrossing, ScenarioKind::SingleRandomGoal, ScenarioKind::PerpetualRandomGoals,
};

std::string_view to_string(ScenarioKind kind);

/// Accepts the canonical names (circle, outgoing, oncoming, perpendicular,
/// single_random_goal, perpetual_random_goals) plus a few aliases.
ScenarioKind parse_scenario_kind(std::string_view name);

struct ScenarioGeometry {
    double circle_radius = 4.0;
    double room_size = 10.0;   ///< side of the square flow/crossing room
    double arena_size = 8.0;   ///< side of the square random-goal arena
    double ped_goal_tolerance = 0.05;  ///< center-to-goal distance counted as arrival
    int max_placement_attempts = 2000;
};

/// How pedestrians are populated.
struct CrowdSpec {
    PolicyTag policy = PolicyTag::Orca;
    /// When non-empty, each pedestrian draws its tag uniformly from this list.
    std::vector<PolicyTag> mix;
    /// Noisy-ORCA pedestrians draw rho ~ U(0, rho_max).
    double rho_max = 0.0;
    double radius = 0.3;
    double v_pref = 1.0;
    OrcaParams orca;
    SocialForceParams social_force;

    /// Per-pedestrian parameter randomization used by the mixed benchmark.
    bool randomize = false;
    double v_pref_min = 0.6, v_pref_max = 1.4;
    double radius_min = 0.25, radius_max = 0.4;
    double horizon_min = 2.0, horizon_max = 8.0;
};

struct SimConfig {
    double dt = 0.25;
    double time_limit = 30.0;
    /// Whether pedestrian policies perceive the robot.
    bool robot_visible = false;
    double robot_radius = 0.3;
    double robot_v_pref = 1.0;
    std::size_t history_capacity = TrackHistory::kDefaultCapacity;
    ScenarioGeometry geometry;
};

struct Pedestrian {
    AgentFullState state;
    PolicyTag policy = PolicyTag::Orca;
    double rho = 0.0;
    OrcaParams orca;
    SocialForceParams social_force;
    TrackHistory history;
    Rng rng;
    bool resample_goal = false;

    PedestrianObservable observable() const { return state.observable(); }
};

struct WorldState {
    AgentFullState robot;
    std::vector<Pedestrian> pedestrians;
    double sim_time = 0.0;
    int step_count = 0;
    double dt = 0.25;
    double time_limit = 30.0;
    bool robot_visible = false;
    ScenarioKind kind = ScenarioKind::CircleCrossing;
    ScenarioGeometry geometry;
    Rng goal_rng;

    bool timed_out() const { return sim_time >= time_limit - 1e-9; }
    std::vector<PedestrianObservable> observe_pedestrians() const;
    std::vector<double> rhos() const;

    /// Checks timing fields, rho ranges and agent radii.
    void validate() const;
};

/// Places the robot and n_peds pedestrians; identical arguments give identical worlds.
/// Throws PlacementError when positions cannot be found without overlaps.
WorldState generate_scenario(ScenarioKind kind, int n_peds, std::uint64_t seed, const SimConfig& sim = {},
                             const CrowdSpec& crowd = {});

/// Free-form velocity command for baseline robot controllers (e.g. ORCA robot).
struct HolonomicVelocity {
    Vec2 velocity;
};

using RobotCommand = std::variant<DiscreteAction, HolonomicVelocity>;

struct StepEvents {
    std::vector<bool> collisions;     ///< robot-pedestrian surface distance < 0 after the step
    std::vector<bool> goal_arrivals;  ///< pedestrian reached its goal during the step
    bool robot_reached_goal = false;
    double min_surface_distance = std::numeric_limits<double>::infinity();
};

/// Velocity every pedestrian would take from the current state (simultaneous update).
std::vector<Vec2> pedestrian_velocities(WorldState& world);

/// Advances the world by one dt. Throws InvalidActionError for actions outside the
/// robot's discrete action space or free velocities faster than v_pref.
StepEvents step_environment(WorldState& world, const RobotCommand& command);

class RobotPolicy {
public:
    virtual ~RobotPolicy() = default;
    virtual std::string name() const = 0;
    virtual void reset(const WorldState&) {}
    virtual RobotCommand act(const WorldState& world) = 0;
    /// Deviation estimates (one per pedestrian) behind the most recent act(), if the policy makes any.
    virtual std::optional<std::vector<double>> last_rho_estimates() const { return std::nullopt; }
};

class StopPolicy final : public RobotPolicy {
public:
    std::string name() const override { return "stop"; }
    RobotCommand act(const WorldState&) override { return DiscreteAction{}; }
};

/// The robot runs ORCA against all pedestrians, taking the whole avoidance
/// burden when it is invisible to them.
class OrcaRobotPolicy final : public RobotPolicy {
public:
    explicit OrcaRobotPolicy(OrcaParams params = {}) : params_(params) {}
    std::string name() const override { return "orca"; }
    RobotCommand act(const WorldState& world) override;

private:
    OrcaParams params_;
};

enum class EpisodeMode {
    Training,    ///< first collision ends the episode
    Evaluation,  ///< contacts are counted and the episode continues
};

enum class EpisodeStatus { Success, Collision, Timeout };

std::string_view to_string(EpisodeStatus status);

struct PedestrianSnapshot {
    PedestrianObservable observable;
    PolicyTag policy = PolicyTag::Orca;
    double rho = 0.0;
    std::optional<double> rho_hat;
};

struct Snapshot {
    int step = 0;
    double time = 0.0;
    AgentFullState robot;
    std::vector<PedestrianSnapshot> pedestrians;
};

Snapshot take_snapshot(const WorldState& world);

struct EpisodeOutcome {
    EpisodeStatus status = EpisodeStatus::Timeout;
    std::vector<Snapshot> trajectory;
    int collision_count = 0;
    int steps = 0;
    double duration = 0.0;
    bool reached_goal = false;
};

/// Steps the world under robot_policy until success, timeout or (training mode) collision.
EpisodeOutcome run_episode(WorldState world, RobotPolicy& robot_policy, EpisodeMode mode = EpisodeMode::Training,
                           bool record = true);

}  // namespace socnav
