#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socnav/world.hpp"

namespace socnav {

struct MetricParams {
    double sigma = 0.5;                 ///< Gaussian personal-space width (m)
    double personal_threshold = 1.2;    ///< surface distance (m)
    double intimate_threshold = 0.45;   ///< surface distance (m)
};

struct TrialMetrics {
    bool success = false;
    bool timeout = false;
    bool collision = false;
    std::optional<double> nav_time_rel;
    std::optional<double> path_len_rel;
    int n_collisions = 0;
    double ps_cost = 0.0;
    double ps_violation = 0.0;
    double is_violation = 0.0;
};

/// Scores a recorded trajectory (pre-step snapshots plus the final one). A trial
/// with any contact is a collision, otherwise success when the goal was reached,
/// otherwise a timeout. Throws std::invalid_argument on an empty trajectory.
TrialMetrics compute_trial_metrics(std::span<const Snapshot> trajectory, bool reached_goal,
                                   const MetricParams& params = {});

enum class TailDirection {
    Cost,     ///< hardest = largest
    Benefit,  ///< hardest = smallest
};

/// Mean of the worst ceil(q n) values; ties keep input order.
/// Throws std::invalid_argument on empty input or q outside (0, 1].
double cvar(std::span<const double> values, double q, TailDirection direction);

/// A named robot controller; make() returns a fresh instance per trial.
struct PolicyEntry {
    std::string name;
    std::function<std::unique_ptr<RobotPolicy>()> make;
};

struct TrialRecord {
    std::string policy;
    int trial = 0;
    std::uint64_t world_hash = 0;
    TrialMetrics metrics;
    EpisodeOutcome outcome;  ///< trajectory kept only when requested
};

struct MetricSummary {
    std::string metric;
    std::optional<double> mean;  ///< empty when no trial defines the metric
    std::optional<double> cvar10;
    std::optional<double> cvar05;
};

struct PolicySummary {
    std::string policy;
    int trials = 0;
    int successes = 0;
    int collisions = 0;  ///< trials with contact
    int timeouts = 0;
    int collision_events = 0;
    std::vector<MetricSummary> metrics;

    double success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
    double collision_rate() const { return trials ? static_cast<double>(collisions) / trials : 0.0; }
    double timeout_rate() const { return trials ? static_cast<double>(timeouts) / trials : 0.0; }
};

struct BenchmarkReport {
    std::vector<PolicySummary> policies;
    std::vector<TrialRecord> trials;

    const PolicySummary& summary(const std::string& policy) const;
};

/// Aggregates trial records per policy (in first-seen order).
BenchmarkReport summarize(std::vector<TrialRecord> trials, const MetricParams& params = {});

struct BenchmarkConfig {
    ScenarioKind scenario = ScenarioKind::CircleCrossing;
    int min_pedestrians = 5;
    int max_pedestrians = 5;
    CrowdSpec crowd;
    SimConfig sim;
    int trials = 100;
    bool keep_trajectories = false;
    MetricParams metrics;
    /// Worker threads; results do not depend on it.
    int jobs = 1;
};

/// Mixed benchmark crowd: uniform over ORCA, social force and linear with randomized parameters.
CrowdSpec mixed_crowd();

/// Hash of the initial world (positions, goals, radii, speeds, policies, rhos).
std::uint64_t world_hash(const WorldState& world);

/// Every policy runs the same seeded scenario sequence in evaluation mode.
BenchmarkReport run_benchmark(std::span<const PolicyEntry> policies, const BenchmarkConfig& config, std::uint64_t seed);

struct SweepPoint {
    double rho_max = 0.0;
    BenchmarkReport report;
};

/// Noisy-ORCA evaluation at each rho_max of the grid.
std::vector<SweepPoint> sweep_noisy_eval(std::span<const PolicyEntry> policies, std::span<const double> rho_grid,
                                         const BenchmarkConfig& config, std::uint64_t seed);

/// One row per policy x metric x {mean, cvar10, cvar05}: policy,metric,mean,cvar10,cvar05.
void write_report_csv(std::ostream& out, const BenchmarkReport& report);
/// Human-readable table with one column per policy.
void write_report_table(std::ostream& out, const BenchmarkReport& report);
/// rho_max,policy,success_rate,collision_rate,timeout_rate,collision_events.
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> sweep);
/// policy,trial,world_hash,success,collision,timeout,nav_time_rel,path_len_rel,n_collisions,ps_cost,ps_violation,is_violation.
void write_trials_csv(std::ostream& out, const BenchmarkReport& report);

}  // namespace socnav
