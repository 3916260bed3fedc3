#include "socnav/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace socnav {

TrialMetrics compute_trial_metrics(std::span<const Snapshot> trajectory, bool reached_goal, const MetricParams& params) {
    if (trajectory.empty()) throw std::invalid_argument("cannot score an empty trajectory");
    TrialMetrics m;
    const AgentFullState& start = trajectory.front().robot;
    const std::size_t steps = trajectory.size() - 1;

    std::vector<bool> in_contact(trajectory.front().pedestrians.size(), false);
    int personal = 0;
    int intimate = 0;
    double path = 0.0;
    const double two_sigma_sq = 2.0 * params.sigma * params.sigma;
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        const Snapshot& s = trajectory[k];
        path += norm(s.robot.position() - trajectory[k - 1].robot.position());
        double closest = std::numeric_limits<double>::infinity();
        if (in_contact.size() < s.pedestrians.size()) in_contact.resize(s.pedestrians.size(), false);
        for (std::size_t i = 0; i < s.pedestrians.size(); ++i) {
            const auto& p = s.pedestrians[i].observable;
            const double center = norm(s.robot.position() - p.position());
            const double surface = center - s.robot.radius - p.radius;
            closest = std::min(closest, surface);
            m.ps_cost += std::exp(-center * center / two_sigma_sq);
            const bool contact = surface < 0.0;
            if (contact && !in_contact[i]) ++m.n_collisions;
            in_contact[i] = contact;
        }
        if (closest < params.personal_threshold) ++personal;
        if (closest < params.intimate_threshold) ++intimate;
    }
    if (steps > 0) {
        m.ps_violation = static_cast<double>(personal) / static_cast<double>(steps);
        m.is_violation = static_cast<double>(intimate) / static_cast<double>(steps);
    }

    m.collision = m.n_collisions > 0;
    m.success = reached_goal && !m.collision;
    m.timeout = !m.success && !m.collision;
    if (m.success) {
        const double straight = goal_surface_distance(start);
        const double duration = trajectory.back().time - trajectory.front().time;
        if (straight > 0.0) {
            m.nav_time_rel = duration / (straight / start.v_pref);
            m.path_len_rel = path / straight;
        }
    }
    return m;
}

double cvar(std::span<const double> values, double q, TailDirection direction) {
    if (values.empty()) throw std::invalid_argument("CVaR of an empty sample");
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("CVaR level must lie in (0, 1]");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    if (direction == TailDirection::Cost)
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    else
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
    const std::size_t take = std::clamp<std::size_t>(k, 1, values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < take; ++i) sum += values[order[i]];
    return sum / static_cast<double>(take);
}

const PolicySummary& BenchmarkReport::summary(const std::string& policy) const {
    for (const auto& p : policies)
        if (p.policy == policy) return p;
    throw std::out_of_range("no policy named '" + policy + "' in the report");
}

namespace {

MetricSummary summarize_metric(std::string name, const std::vector<double>& values, bool tails) {
    MetricSummary s;
    s.metric = std::move(name);
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (tails) {
        s.cvar10 = cvar(values, 0.10, TailDirection::Cost);
        s.cvar05 = cvar(values, 0.05, TailDirection::Cost);
    }
    return s;
}

}  // namespace

BenchmarkReport summarize(std::vector<TrialRecord> trials, const MetricParams&) {
    BenchmarkReport report;
    std::vector<std::string> names;
    for (const auto& t : trials)
        if (std::find(names.begin(), names.end(), t.policy) == names.end()) names.push_back(t.policy);

    for (const auto& name : names) {
        PolicySummary p;
        p.policy = name;
        std::vector<double> success, collision, timeout, nav, len, ncoll, cost, psv, isv;
        for (const auto& t : trials) {
            if (t.policy != name) continue;
            const TrialMetrics& m = t.metrics;
            ++p.trials;
            p.successes += m.success;
            p.collisions += m.collision;
            p.timeouts += m.timeout;
            p.collision_events += m.n_collisions;
            success.push_back(m.success);
            collision.push_back(m.collision);
            timeout.push_back(m.timeout);
            if (m.nav_time_rel) nav.push_back(*m.nav_time_rel);
            if (m.path_len_rel) len.push_back(*m.path_len_rel);
            ncoll.push_back(m.n_collisions);
            cost.push_back(m.ps_cost);
            psv.push_back(m.ps_violation);
            isv.push_back(m.is_violation);
        }
        p.metrics.push_back(summarize_metric("success_rate", success, false));
        p.metrics.push_back(summarize_metric("collision_rate", collision, false));
        p.metrics.push_back(summarize_metric("timeout_rate", timeout, false));
        p.metrics.push_back(summarize_metric("nav_time_rel", nav, true));
        p.metrics.push_back(summarize_metric("path_len_rel", len, true));
        p.metrics.push_back(summarize_metric("n_collisions", ncoll, true));
        p.metrics.push_back(summarize_metric("ps_cost", cost, true));
        p.metrics.push_back(summarize_metric("ps_violation", psv, true));
        p.metrics.push_back(summarize_metric("is_violation", isv, true));
        report.policies.push_back(std::move(p));
    }
    report.trials = std::move(trials);
    return report;
}

CrowdSpec mixed_crowd() {
    CrowdSpec c;
    c.mix = {PolicyTag::Orca, PolicyTag::SocialForce, PolicyTag::Linear};
    c.randomize = true;
    return c;
}

std::uint64_t world_hash(const WorldState& world) {
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    const auto agent = [&](const AgentFullState& a) {
        for (double v : {a.px, a.py, a.vx, a.vy, a.radius, a.gx, a.gy, a.v_pref, a.theta}) mix(v);
    };
    agent(world.robot);
    for (const auto& p : world.pedestrians) {
        agent(p.state);
        mix(static_cast<double>(p.policy));
        mix(p.rho);
        mix(p.orca.time_horizon);
    }
    return h;
}

BenchmarkReport run_benchmark(std::span<const PolicyEntry> policies, const BenchmarkConfig& config, std::uint64_t seed) {
    if (config.min_pedestrians < 0 || config.max_pedestrians < config.min_pedestrians)
        throw std::invalid_argument("pedestrian count range is empty");
    const auto n_trials = static_cast<std::size_t>(std::max(0, config.trials));
    std::vector<int> sizes(n_trials);
    Rng size_rng = Rng::stream(seed, "trial_size");
    const auto range = static_cast<std::uint64_t>(config.max_pedestrians - config.min_pedestrians + 1);
    for (auto& n : sizes) n = config.min_pedestrians + static_cast<int>(size_rng.index(range));

    std::vector<TrialRecord> records(n_trials * policies.size());
    const auto run_trial = [&](std::size_t trial) {
        const WorldState world = generate_scenario(config.scenario, sizes[trial], derive_seed(seed, "trial", trial),
                                                   config.sim, config.crowd);
        const std::uint64_t hash = world_hash(world);
        for (std::size_t p = 0; p < policies.size(); ++p) {
            std::unique_ptr<RobotPolicy> policy = policies[p].make();
            TrialRecord& rec = records[trial * policies.size() + p];
            rec.policy = policies[p].name;
            rec.trial = static_cast<int>(trial);
            rec.world_hash = hash;
            rec.outcome = run_episode(world, *policy, EpisodeMode::Evaluation, true);
            rec.metrics = compute_trial_metrics(rec.outcome.trajectory, rec.outcome.reached_goal, config.metrics);
            if (!config.keep_trajectories) {
                rec.outcome.trajectory.clear();
                rec.outcome.trajectory.shrink_to_fit();
            }
        }
    };

    const auto workers = static_cast<std::size_t>(std::max(1, config.jobs));
    if (workers == 1) {
        for (std::size_t t = 0; t < n_trials; ++t) run_trial(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < n_trials; t = next++) {
                    try {
                        run_trial(t);
                    } catch (...) {
                        const std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    return summarize(std::move(records), config.metrics);
}

std::vector<SweepPoint> sweep_noisy_eval(std::span<const PolicyEntry> policies, std::span<const double> rho_grid,
                                         const BenchmarkConfig& config, std::uint64_t seed) {
    std::vector<SweepPoint> out;
    for (std::size_t g = 0; g < rho_grid.size(); ++g) {
        const double rho_max = rho_grid[g];
        if (!(rho_max >= 0.0 && rho_max <= 1.0)) throw std::invalid_argument("rho_max grid must lie in [0, 1]");
        BenchmarkConfig c = config;
        c.crowd.policy = PolicyTag::NoisyOrca;
        c.crowd.mix.clear();
        c.crowd.rho_max = rho_max;
        out.push_back({rho_max, run_benchmark(policies, c, derive_seed(seed, "sweep", g))});
    }
    return out;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "policy,metric,mean,cvar10,cvar05\n";
    for (const auto& p : report.policies)
        for (const auto& m : p.metrics)
            fmt::print(out, "{},{},{},{},{}\n", p.policy, m.metric, fmt_opt(m.mean), fmt_opt(m.cvar10), fmt_opt(m.cvar05));
}

void write_report_table(std::ostream& out, const BenchmarkReport& report) {
    fmt::print(out, "{:<16}", "metric");
    for (const auto& p : report.policies) fmt::print(out, " {:>26}", p.policy);
    out << '\n';
    if (report.policies.empty()) return;
    for (std::size_t k = 0; k < report.policies.front().metrics.size(); ++k) {
        fmt::print(out, "{:<16}", report.policies.front().metrics[k].metric);
        for (const auto& p : report.policies) {
            const auto& m = p.metrics[k];
            std::string cell = m.mean ? fmt::format("{:.3f}", *m.mean) : "-";
            if (m.cvar10) cell += fmt::format(" ({:.3f}/{:.3f})", *m.cvar10, *m.cvar05);
            fmt::print(out, " {:>26}", cell);
        }
        out << '\n';
    }
    out << "cells: mean (CVaR 10% / CVaR 5%)\n";
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> sweep) {
    out << "rho_max,policy,trials,success_rate,collision_rate,timeout_rate,collision_events\n";
    for (const auto& point : sweep)
        for (const auto& p : point.report.policies)
            fmt::print(out, "{:.2f},{},{},{:.4f},{:.4f},{:.4f},{}\n", point.rho_max, p.policy, p.trials, p.success_rate(),
                       p.collision_rate(), p.timeout_rate(), p.collision_events);
}

void write_trials_csv(std::ostream& out, const BenchmarkReport& report) {
    out << "policy,trial,world_hash,success,collision,timeout,nav_time_rel,path_len_rel,n_collisions,ps_cost,"
           "ps_violation,is_violation\n";
    for (const auto& t : report.trials) {
        const TrialMetrics& m = t.metrics;
        fmt::print(out, "{},{},{:016x},{:d},{:d},{:d},{},{},{},{:.6f},{:.6f},{:.6f}\n", t.policy, t.trial, t.world_hash,
                   m.success, m.collision, m.timeout, fmt_opt(m.nav_time_rel), fmt_opt(m.path_len_rel), m.n_collisions,
                   m.ps_cost, m.ps_violation, m.is_violation);
    }
}

}  // namespace socnav
