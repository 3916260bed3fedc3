#include "socnav/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "socnav/error.hpp"

namespace socnav {

void TrainingHyperparams::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch == 0) throw ConfigError("batch size must be positive");
    if (episodes < 0) throw ConfigError("episode count must be non-negative");
    if (target_update <= 0) throw ConfigError("target update interval must be positive");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw ConfigError("epsilon values must lie in [0, 1]");
    if (epsilon_end > epsilon_start) throw ConfigError("epsilon_end must not exceed epsilon_start");
    if (epsilon_decay <= 0) throw ConfigError("epsilon decay must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (t_max <= 0) throw ConfigError("t_max must be positive");
}

double curriculum_rho_max(int episode, int stage_length, double step, double cap) {
    if (episode < 0) throw std::invalid_argument("episode must be non-negative");
    if (stage_length <= 0) throw std::invalid_argument("stage length must be positive");
    return std::min(cap, step * static_cast<double>(episode / stage_length));
}

double epsilon_schedule(int episode, const TrainingHyperparams& hp) {
    if (episode < 0) throw std::invalid_argument("episode must be non-negative");
    if (episode >= hp.epsilon_decay) return hp.epsilon_end;
    return hp.epsilon_start + (hp.epsilon_end - hp.epsilon_start) / hp.epsilon_decay * episode;
}

std::string_view to_string(TrainingVariant variant) {
    switch (variant) {
        case TrainingVariant::Sarl: return "sarl";
        case TrainingVariant::Training: return "training";
        case TrainingVariant::Model: return "model";
        case TrainingVariant::Reward: return "reward";
    }
    return "?";
}

TrainingVariant parse_training_variant(std::string_view name) {
    if (name == "sarl") return TrainingVariant::Sarl;
    if (name == "training") return TrainingVariant::Training;
    if (name == "model") return TrainingVariant::Model;
    if (name == "reward") return TrainingVariant::Reward;
    throw ConfigError("unknown training variant '" + std::string(name) + "' (expected sarl, training, model or reward)");
}

VariantSettings variant_settings(TrainingVariant variant) {
    VariantSettings v;
    v.name = std::string(to_string(variant));
    v.curriculum = variant != TrainingVariant::Sarl;
    v.feed_rho = variant == TrainingVariant::Model || variant == TrainingVariant::Reward;
    v.reward = variant == TrainingVariant::Reward ? RewardVariant::Modified : RewardVariant::Default;
    return v;
}

VariantSettings fixed_discomfort_variant(double d_disc) {
    VariantSettings v = variant_settings(TrainingVariant::Sarl);
    v.name = fmt::format("sarl_d{:.2f}", d_disc);
    v.reward_params.d_disc_const = d_disc;
    return v;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

Transition& ReplayBuffer::operator[](std::size_t i) {
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t m, Rng& rng) const {
    if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(m);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.index(items_.size()));
    return idx;
}

LookaheadConfig TrainerConfig::lookahead() const {
    LookaheadConfig c;
    c.gamma = hp.gamma;
    c.normalized_discount = normalized_discount;
    c.feed_rho = variant.feed_rho;
    c.heading = heading;
    c.reward = RewardFunction(variant.reward, variant.reward_params);
    return c;
}

namespace {

SimConfig training_sim(const TrainerConfig& config) {
    SimConfig sim = config.sim;
    sim.time_limit = config.hp.t_max * sim.dt;
    return sim;
}

double step_discount(const TrainerConfig& config) {
    return config.lookahead().step_discount(config.sim.dt, config.sim.robot_v_pref);
}

/// One rollout step's bookkeeping shared by demos and training.
struct StepRecord {
    Transition transition;
    EpisodeStatus status = EpisodeStatus::Timeout;
    bool done = false;
};

StepRecord advance(WorldState& world, const RobotCommand& command, const JointState& before,
                   const LookaheadConfig& lookahead) {
    const StepEvents events = step_environment(world, command);
    const std::vector<double> rhos = world.rhos();
    const JointState after = observe(world, rhos);

    StepRecord rec;
    rec.transition.state = make_value_input(before, lookahead.feed_rho, lookahead.heading);
    rec.transition.next_state = make_value_input(after, lookahead.feed_rho, lookahead.heading);
    rec.transition.reward = state_reward(after, lookahead.reward);

    bool collided = false;
    for (const bool c : events.collisions) collided = collided || c;
    if (collided) {
        rec.status = EpisodeStatus::Collision;
        rec.done = true;
    } else if (events.robot_reached_goal) {
        rec.status = EpisodeStatus::Success;
        rec.done = true;
    } else if (world.timed_out()) {
        rec.status = EpisodeStatus::Timeout;
        rec.done = true;
    }
    rec.transition.terminal = rec.done;
    return rec;
}

std::vector<ValueInput> gather_states(const ReplayBuffer& buffer, std::span<const std::size_t> idx) {
    std::vector<ValueInput> out;
    out.reserve(idx.size());
    for (const auto i : idx) out.push_back(buffer[i].state);
    return out;
}

/// Fits V(s) to Monte Carlo returns of the demo episodes.
void imitation_pretrain(ValueNetwork& net, const std::vector<ValueInput>& states, const std::vector<double>& returns,
                        const TrainerConfig& config, Rng& rng) {
    if (states.empty() || config.imitation_epochs <= 0) return;
    std::vector<std::size_t> order(states.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < config.imitation_epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
        for (std::size_t start = 0; start < order.size(); start += config.hp.batch) {
            const std::size_t len = std::min(config.hp.batch, order.size() - start);
            std::vector<ValueInput> batch;
            Eigen::VectorXd y(static_cast<Eigen::Index>(len));
            batch.reserve(len);
            for (std::size_t k = 0; k < len; ++k) {
                batch.push_back(states[order[start + k]]);
                y(static_cast<Eigen::Index>(k)) = returns[order[start + k]];
            }
            const auto pass = net.forward(batch);
            const Eigen::VectorXd grad = (2.0 / static_cast<double>(len)) * (pass.values - y);
            net.sgd_momentum_step(net.backward(pass, grad), config.imitation_lr, config.hp.momentum);
        }
    }
    net.mlp2().reset_momentum();
    net.mlp3().reset_momentum();
    net.mlp4().reset_momentum();
    net.mlp5().reset_momentum();
}

ReplayBuffer run_demos(const TrainerConfig& config, std::uint64_t seed, int* successes,
                       std::vector<ValueInput>* mc_states, std::vector<double>* mc_returns) {
    ReplayBuffer buffer(config.buffer_capacity);
    const LookaheadConfig lookahead = config.lookahead();
    const SimConfig sim = training_sim(config);
    const double discount = step_discount(config);
    CrowdSpec crowd;
    crowd.policy = PolicyTag::Orca;
    OrcaRobotPolicy robot(config.demo_orca);
    int wins = 0;
    for (int e = 0; e < config.demo_episodes; ++e) {
        WorldState world = generate_scenario(config.scenario, config.pedestrians,
                                             derive_seed(seed, "demo_episode", static_cast<std::uint64_t>(e)), sim, crowd);
        std::vector<Transition> episode;
        while (true) {
            const JointState before = observe(world, world.rhos());
            const RobotCommand command = robot.act(world);
            StepRecord rec = advance(world, command, before, lookahead);
            episode.push_back(std::move(rec.transition));
            if (rec.done) {
                if (rec.status == EpisodeStatus::Success) ++wins;
                break;
            }
        }
        if (mc_states && mc_returns) {
            double g = 0.0;
            std::vector<double> returns(episode.size());
            for (std::size_t k = episode.size(); k-- > 0;) {
                g = episode[k].reward + (episode[k].terminal ? 0.0 : discount * g);
                returns[k] = g;
            }
            for (std::size_t k = 0; k < episode.size(); ++k) {
                mc_states->push_back(episode[k].state);
                mc_returns->push_back(returns[k]);
            }
        }
        for (auto& t : episode) buffer.push(std::move(t));
    }
    if (successes) *successes = wins;
    return buffer;
}

void write_diagnostic(const TrainerConfig& config, int episode, const Eigen::VectorXd& values, const Eigen::VectorXd& y) {
    if (!config.out_dir) return;
    std::filesystem::create_directories(*config.out_dir);
    std::ofstream out(*config.out_dir / "diagnostic.txt");
    fmt::print(out, "non-finite training loss at episode {}\n", episode);
    fmt::print(out, "variant {}\n", config.variant.name);
    for (Eigen::Index i = 0; i < values.size(); ++i) fmt::print(out, "{} value {} target {}\n", i, values(i), y(i));
}

nn::CheckpointMetadata metadata_for(const TrainerConfig& config, int episodes) {
    nn::CheckpointMetadata m;
    m.episodes = static_cast<std::uint64_t>(episodes);
    m.curriculum_stage = config.variant.curriculum
                             ? static_cast<std::uint32_t>(
                                   std::lround(curriculum_rho_max(std::max(0, episodes - 1), config.variant.stage_length,
                                                                  config.variant.rho_step, config.variant.rho_cap) /
                                               config.variant.rho_step))
                             : 0;
    m.extra["variant"] = config.variant.name;
    m.extra["feed_rho"] = config.variant.feed_rho ? "1" : "0";
    m.extra["reward"] = std::string(to_string(config.variant.reward));
    m.extra["k_succ"] = fmt::format("{}", config.variant.reward_params.k_succ);
    m.extra["k_coll"] = fmt::format("{}", config.variant.reward_params.k_coll);
    m.extra["k_disc"] = fmt::format("{}", config.variant.reward_params.k_disc);
    m.extra["d_disc_const"] = fmt::format("{}", config.variant.reward_params.d_disc_const);
    m.extra["slope"] = fmt::format("{}", config.variant.reward_params.slope);
    m.extra["intercept"] = fmt::format("{}", config.variant.reward_params.intercept);
    m.extra["gamma"] = fmt::format("{}", config.hp.gamma);
    m.extra["normalized_discount"] = config.normalized_discount ? "1" : "0";
    m.extra["heading"] = config.heading == HeadingMode::WorldFrame ? "world" : "goal_relative";
    return m;
}

}  // namespace

ReplayBuffer imitation_bootstrap(const TrainerConfig& config, std::uint64_t seed, int* successes) {
    return run_demos(config, seed, successes, nullptr, nullptr);
}

Eigen::VectorXd compute_targets(ReplayBuffer& buffer, std::span<const std::size_t> idx, const ValueNetwork& target,
                                std::uint64_t target_version, double discount) {
    std::vector<std::size_t> stale;
    std::vector<ValueInput> inputs;
    for (const auto i : idx) {
        Transition& t = buffer[i];
        if (t.terminal || t.target_version == target_version) continue;
        t.target_version = target_version;  // claims the slot so duplicates are evaluated once
        stale.push_back(i);
        inputs.push_back(t.next_state);
    }
    if (!inputs.empty()) {
        const Eigen::VectorXd v = target.values(inputs);
        for (std::size_t k = 0; k < stale.size(); ++k) buffer[stale[k]].cached_next_value = v(static_cast<Eigen::Index>(k));
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const Transition& t = buffer[idx[k]];
        y(static_cast<Eigen::Index>(k)) = t.terminal ? t.reward : t.reward + discount * t.cached_next_value;
    }
    return y;
}

TrainingResult train_value_network(const TrainerConfig& config, std::uint64_t seed) {
    config.hp.validate();
    config.variant.reward_params.validate();
    const auto wall_start = std::chrono::steady_clock::now();
    const LookaheadConfig lookahead = config.lookahead();
    const SimConfig sim = training_sim(config);
    const double discount = step_discount(config);
    const ActionSpace space(sim.robot_v_pref);

    Rng init_rng = Rng::stream(seed, "init");
    Rng explore_rng = Rng::stream(seed, "explore");
    Rng sample_rng = Rng::stream(seed, "replay");
    Rng imitation_rng = Rng::stream(seed, "imitation");

    TrainingResult result{ValueNetwork::initialized(init_rng), {}, {}};
    ValueNetwork& net = result.net;

    std::vector<ValueInput> mc_states;
    std::vector<double> mc_returns;
    ReplayBuffer buffer = run_demos(config, seed, nullptr, &mc_states, &mc_returns);
    imitation_pretrain(net, mc_states, mc_returns, config, imitation_rng);
    mc_states.clear();
    mc_states.shrink_to_fit();
    mc_returns.clear();

    ValueNetwork target = net;
    std::uint64_t target_version = 1;

    std::optional<std::ofstream> log_file;
    if (config.out_dir) {
        std::filesystem::create_directories(*config.out_dir / "checkpoints");
        log_file.emplace(*config.out_dir / "train.csv");
        write_training_log_header(*log_file);
    }

    CrowdSpec crowd;
    crowd.policy = PolicyTag::NoisyOrca;

    for (int ep = 0; ep < config.hp.episodes; ++ep) {
        if (ep > 0 && ep % config.hp.target_update == 0) {
            target.copy_parameters_from(net);
            ++target_version;
        }
        crowd.rho_max = config.variant.curriculum ? curriculum_rho_max(ep, config.variant.stage_length,
                                                                       config.variant.rho_step, config.variant.rho_cap)
                                                  : 0.0;
        const double eps = epsilon_schedule(ep, config.hp);
        WorldState world = generate_scenario(config.scenario, config.pedestrians,
                                             derive_seed(seed, "train_episode", static_cast<std::uint64_t>(ep)), sim,
                                             crowd);
        EpisodeLog row;
        row.episode = ep;
        row.epsilon = eps;
        row.rho_max = crowd.rho_max;
        double loss_sum = 0.0;
        int updates = 0;
        double weight = 1.0;

        while (true) {
            const JointState before = observe(world, world.rhos());
            const std::size_t a = epsilon_greedy_lazy(eps, explore_rng, space.size(), [&] {
                return select_action(net, before, sim.dt, space, lookahead).index;
            });
            StepRecord rec = advance(world, space[a], before, lookahead);
            row.discounted_return += weight * rec.transition.reward;
            weight *= discount;
            ++row.steps;
            buffer.push(std::move(rec.transition));

            if (buffer.size() >= config.hp.batch) {
                const std::vector<std::size_t> idx = buffer.sample(config.hp.batch, sample_rng);
                const Eigen::VectorXd y = compute_targets(buffer, idx, target, target_version, discount);
                const auto pass = net.forward(gather_states(buffer, idx));
                nn::Matrix grad;
                const double loss = nn::mse_loss(pass.values.transpose(), y.transpose(), &grad);
                if (!std::isfinite(loss)) {
                    write_diagnostic(config, ep, pass.values, y);
                    throw NonFiniteError(fmt::format("non-finite training loss at episode {}", ep));
                }
                const auto grads = net.backward(pass, grad.transpose());
                if (!grads.all_finite()) {
                    write_diagnostic(config, ep, pass.values, y);
                    throw NonFiniteError(fmt::format("non-finite gradient at episode {}", ep));
                }
                net.sgd_momentum_step(grads, config.hp.lr, config.hp.momentum);
                loss_sum += loss;
                ++updates;
            }
            if (rec.done) {
                row.outcome = rec.status;
                break;
            }
        }
        row.loss_mean = updates > 0 ? loss_sum / updates : 0.0;
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        if (log_file) write_training_log_row(*log_file, row);
        if (config.on_episode) config.on_episode(row);
        result.log.push_back(row);

        if (config.out_dir && config.checkpoint_interval > 0 && (ep + 1) % config.checkpoint_interval == 0)
            nn::save_checkpoint(*config.out_dir / "checkpoints" / fmt::format("episode_{:05d}.snck", ep + 1),
                                net.to_checkpoint(metadata_for(config, ep + 1)));
    }

    result.checkpoint = net.to_checkpoint(metadata_for(config, config.hp.episodes));
    if (config.out_dir) nn::save_checkpoint(*config.out_dir / "checkpoints" / "final.snck", result.checkpoint);
    return result;
}

LookaheadConfig lookahead_from_checkpoint(const nn::Checkpoint& checkpoint) {
    const auto& extra = checkpoint.metadata.extra;
    const auto get = [&](const char* key) -> const std::string& {
        const auto it = extra.find(key);
        if (it == extra.end()) throw ShapeMismatchError(std::string("policy checkpoint lacks '") + key + "'");
        return it->second;
    };
    LookaheadConfig c;
    c.gamma = std::stod(get("gamma"));
    c.normalized_discount = get("normalized_discount") == "1";
    c.feed_rho = get("feed_rho") == "1";
    c.heading = get("heading") == "world" ? HeadingMode::WorldFrame : HeadingMode::GoalRelative;
    RewardParams p;
    p.k_succ = std::stod(get("k_succ"));
    p.k_coll = std::stod(get("k_coll"));
    p.k_disc = std::stod(get("k_disc"));
    p.d_disc_const = std::stod(get("d_disc_const"));
    p.slope = std::stod(get("slope"));
    p.intercept = std::stod(get("intercept"));
    c.reward = RewardFunction(parse_reward_variant(get("reward")), p);
    return c;
}

void write_training_log_header(std::ostream& out) {
    out << "episode,outcome,steps,return,loss_mean,epsilon,rho_max,wall_seconds\n";
}

void write_training_log_row(std::ostream& out, const EpisodeLog& row) {
    fmt::print(out, "{},{},{},{:.6f},{:.6g},{:.4f},{:.2f},{:.2f}\n", row.episode, to_string(row.outcome), row.steps,
               row.discounted_return, row.loss_mean, row.epsilon, row.rho_max, row.wall_seconds);
    out.flush();
}

}  // namespace socnav
