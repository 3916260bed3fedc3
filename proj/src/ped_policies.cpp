#include "socnav/ped_policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace socnav {
namespace {

constexpr double kLpEpsilon = 1e-5;

}  // namespace

std::string_view to_string(PolicyTag tag) {
    switch (tag) {
        case PolicyTag::Orca: return "orca";
        case PolicyTag::NoisyOrca: return "noisy_orca";
        case PolicyTag::Linear: return "linear";
        case PolicyTag::SocialForce: return "social_force";
    }
    return "unknown";
}

PolicyTag parse_policy_tag(std::string_view name) {
    if (name == "orca") return PolicyTag::Orca;
    if (name == "noisy_orca") return PolicyTag::NoisyOrca;
    if (name == "linear") return PolicyTag::Linear;
    if (name == "social_force") return PolicyTag::SocialForce;
    throw std::invalid_argument("unknown pedestrian policy tag '" + std::string(name) + "'");
}

void OrcaParams::validate() const {
    if (!(time_horizon > 0.0) || !(neighbor_dist > 0.0) || max_neighbors <= 0)
        throw std::invalid_argument("ORCA parameters must all be strictly positive");
    if (!(responsibility > 0.0 && responsibility <= 1.0)) throw std::invalid_argument("ORCA responsibility must lie in (0, 1]");
    if (!(safety_margin >= 0.0) || !(radius_padding >= 0.0))
        throw std::invalid_argument("ORCA safety margin and radius padding must be non-negative");
}

Vec2 preferred_velocity(const AgentFullState& self, double dt) {
    const Vec2 to_goal = self.goal() - self.position();
    const double dist = norm(to_goal);
    if (dist <= 0.0) return {};
    const double speed = std::min(self.v_pref, dist / dt);
    return to_goal * (speed / dist);
}

OrcaLine orca_constraint(const AgentFullState& self, const PedestrianObservable& other, double time_horizon,
                         double dt, double responsibility, double safety_margin) {
    const double inv_horizon = 1.0 / time_horizon;
    const Vec2 rel_pos = other.position() - self.position();
    const Vec2 rel_vel = self.velocity() - other.velocity();
    const double dist_sq = norm_sq(rel_pos);
    const double combined_radius = self.radius + other.radius + safety_margin;
    const double combined_radius_sq = combined_radius * combined_radius;

    OrcaLine line;
    Vec2 u;
    if (dist_sq > combined_radius_sq) {
        const Vec2 w = rel_vel - inv_horizon * rel_pos;
        const double w_length_sq = norm_sq(w);
        const double dot1 = dot(w, rel_pos);
        if (dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_length_sq) {
            // Project onto the truncation circle.
            const double w_length = std::sqrt(w_length_sq);
            const Vec2 unit_w = w / w_length;
            line.direction = {unit_w.y, -unit_w.x};
            u = (combined_radius * inv_horizon - w_length) * unit_w;
        } else {
            const double leg = std::sqrt(dist_sq - combined_radius_sq);
            if (det(rel_pos, w) > 0.0) {
                line.direction = Vec2{rel_pos.x * leg - rel_pos.y * combined_radius,
                                      rel_pos.x * combined_radius + rel_pos.y * leg} /
                                 dist_sq;
            } else {
                line.direction = -Vec2{rel_pos.x * leg + rel_pos.y * combined_radius,
                                       -rel_pos.x * combined_radius + rel_pos.y * leg} /
                                 dist_sq;
            }
            u = dot(rel_vel, line.direction) * line.direction - rel_vel;
        }
    } else {
        // Already overlapping: resolve within one time step.
        const double inv_step = 1.0 / dt;
        const Vec2 w = rel_vel - inv_step * rel_pos;
        double w_length = norm(w);
        Vec2 unit_w;
        if (w_length > 0.0) {
            unit_w = w / w_length;
        } else {
            // Coincident centers with equal velocities: push along an arbitrary fixed axis.
            unit_w = {1.0, 0.0};
            w_length = 0.0;
        }
        line.direction = {unit_w.y, -unit_w.x};
        u = (combined_radius * inv_step - w_length) * unit_w;
    }
    line.point = self.velocity() + responsibility * u;
    return line;
}

namespace orca_detail {

bool linear_program1(std::span<const OrcaLine> lines, std::size_t line_no, double radius, const Vec2& opt_velocity,
                     bool direction_opt, Vec2& result) {
    const OrcaLine& line = lines[line_no];
    const double dot_product = dot(line.point, line.direction);
    const double discriminant = dot_product * dot_product + radius * radius - norm_sq(line.point);
    if (discriminant < 0.0) return false;  // max speed circle fully invalidates this line

    const double sqrt_disc = std::sqrt(discriminant);
    double t_left = -dot_product - sqrt_disc;
    double t_right = -dot_product + sqrt_disc;

    for (std::size_t i = 0; i < line_no; ++i) {
        const double denominator = det(line.direction, lines[i].direction);
        const double numerator = det(lines[i].direction, line.point - lines[i].point);
        if (std::abs(denominator) <= kLpEpsilon) {
            if (numerator < 0.0) return false;  // parallel and infeasible
            continue;
        }
        const double t = numerator / denominator;
        if (denominator >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        result = dot(opt_velocity, line.direction) > 0.0 ? line.point + t_right * line.direction
                                                         : line.point + t_left * line.direction;
    } else {
        const double t = dot(line.direction, opt_velocity - line.point);
        if (t < t_left) {
            result = line.point + t_left * line.direction;
        } else if (t > t_right) {
            result = line.point + t_right * line.direction;
        } else {
            result = line.point + t * line.direction;
        }
    }
    return true;
}

std::size_t linear_program2(std::span<const OrcaLine> lines, double radius, const Vec2& opt_velocity,
                            bool direction_opt, Vec2& result) {
    if (direction_opt) {
        result = opt_velocity * radius;
    } else if (norm_sq(opt_velocity) > radius * radius) {
        result = normalized(opt_velocity) * radius;
    } else {
        result = opt_velocity;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > 0.0) {
            const Vec2 previous = result;
            if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
                result = previous;
                return i;
            }
        }
    }
    return lines.size();
}

void linear_program3(std::span<const OrcaLine> lines, std::size_t begin_line, double radius, Vec2& result) {
    double distance = 0.0;
    std::vector<OrcaLine> projected;
    for (std::size_t i = begin_line; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) <= distance) continue;

        projected.clear();
        for (std::size_t j = 0; j < i; ++j) {
            OrcaLine line;
            const double determinant = det(lines[i].direction, lines[j].direction);
            if (std::abs(determinant) <= kLpEpsilon) {
                if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
                line.point = 0.5 * (lines[i].point + lines[j].point);
            } else {
                line.point = lines[i].point +
                             (det(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                                 lines[i].direction;
            }
            line.direction = normalized(lines[j].direction - lines[i].direction);
            projected.push_back(line);
        }

        const Vec2 previous = result;
        if (linear_program2(projected, radius, Vec2{-lines[i].direction.y, lines[i].direction.x}, true, result) <
            projected.size()) {
            // Can only fail through rounding; keep the previous result.
            result = previous;
        }
        distance = det(lines[i].direction, lines[i].point - result);
    }
}

}  // namespace orca_detail

Vec2 orca_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors,
                 const OrcaParams& params, double dt) {
    const double range_sq = params.neighbor_dist * params.neighbor_dist;
    std::vector<std::pair<double, std::size_t>> in_range;
    in_range.reserve(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const double d_sq = norm_sq(neighbors[i].position() - self.position());
        if (d_sq < range_sq) in_range.emplace_back(d_sq, i);
    }
    // Stable ordering keeps ties deterministic.
    std::stable_sort(in_range.begin(), in_range.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (in_range.size() > static_cast<std::size_t>(params.max_neighbors)) in_range.resize(params.max_neighbors);

    std::vector<OrcaLine> lines;
    lines.reserve(in_range.size());
    for (const auto& [d_sq, i] : in_range) lines.push_back(orca_constraint(self, neighbors[i], params.time_horizon, dt, params.responsibility,
                                                            params.safety_margin + 2.0 * params.radius_padding));

    const Vec2 pref = preferred_velocity(self, dt);
    Vec2 result;
    const std::size_t fail = orca_detail::linear_program2(lines, self.v_pref, pref, false, result);
    if (fail < lines.size()) orca_detail::linear_program3(lines, fail, self.v_pref, result);
    return clamp_norm(result, self.v_pref);
}

Vec2 mix_noise(const Vec2& orca_velocity, double rho, double v_pref, Rng& rng) {
    const double sigma = std::sqrt(v_pref);
    const Vec2 noise{sigma * rng.normal(), sigma * rng.normal()};
    return (1.0 - rho) * orca_velocity + rho * noise;
}

Vec2 noisy_orca_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors, double rho,
                       Rng& rng, const OrcaParams& params, double dt) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("deviation value rho must lie in [0, 1]");
    return mix_noise(orca_action(self, neighbors, params, dt), rho, self.v_pref, rng);
}

Vec2 linear_action(const AgentFullState& self, double dt) { return preferred_velocity(self, dt); }

Vec2 social_force_action(const AgentFullState& self, std::span<const PedestrianObservable> neighbors,
                         const SocialForceParams& params, double dt) {
    Vec2 v = params.attraction_gain * preferred_velocity(self, dt);
    for (const auto& other : neighbors) {
        const Vec2 away = self.position() - other.position();
        const double center = norm(away);
        const double gap = center - self.radius - other.radius;
        const double magnitude = params.repulsion_amplitude * std::exp(-gap / params.decay_length);
        if (magnitude == 0.0) continue;
        const Vec2 n = center > 0.0 ? away / center : Vec2{1.0, 0.0};
        const Vec2 sidestep{-n.y, n.x};  // pass whoever is ahead on their right-hand side
        v += magnitude * (n + params.lateral_ratio * sidestep);
    }
    return clamp_norm(v, self.v_pref);
}

}  // namespace socnav
