#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "socnav/world.hpp"

namespace socnav {

/// One line of a trajectory log. Agent 0 is the robot; pedestrian i is agent i + 1.
///
/// Lines are JSON objects with this fixed key order:
///   episode, step, agent, px, py, vx, vy, radius, rho, policy, rho_hat
/// rho is the ground-truth deviation of Noisy-ORCA pedestrians and null for the
/// robot and every other policy; rho_hat is the robot's estimate or null.
struct TrajectoryRecord {
    int episode = 0;
    int step = 0;
    int agent = 0;
    double px = 0.0, py = 0.0, vx = 0.0, vy = 0.0, radius = 0.0;
    std::optional<double> rho;
    std::string policy;
    std::optional<double> rho_hat;
};

std::vector<TrajectoryRecord> trajectory_records(int episode, const EpisodeOutcome& outcome);

void write_trajectory_log(std::ostream& out, int episode, const EpisodeOutcome& outcome);
void write_trajectory_record(std::ostream& out, const TrajectoryRecord& record);

/// Throws ParseError naming the 1-based line of the first malformed record.
std::vector<TrajectoryRecord> read_trajectory_log(std::istream& in);

}  // namespace socnav
