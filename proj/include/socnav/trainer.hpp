#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "socnav/checkpoint.hpp"
#include "socnav/reward.hpp"
#include "socnav/rng.hpp"
#include "socnav/value_network.hpp"
#include "socnav/value_policy.hpp"
#include "socnav/world.hpp"

namespace socnav {

struct TrainingHyperparams {
    double gamma = 0.9;
    double lr = 0.001;
    std::size_t batch = 100;
    int episodes = 12000;
    int target_update = 50;
    double epsilon_start = 0.5;
    double epsilon_end = 0.1;
    int epsilon_decay = 4000;
    double momentum = 0.9;
    int t_max = 120;

    /// Throws ConfigError on non-positive values or epsilon_end > epsilon_start.
    void validate() const;
};

/// min(cap, step * floor(episode / stage_length)).
double curriculum_rho_max(int episode, int stage_length = 2000, double step = 0.1, double cap = 0.5);

/// Linear from epsilon_start to epsilon_end over epsilon_decay episodes, then constant.
double epsilon_schedule(int episode, const TrainingHyperparams& hp = {});

/// Ablation variants: sarl (no noise, default reward, no rho input), training
/// (+ noise curriculum), model (+ rho input), reward (+ rho-dependent discomfort).
enum class TrainingVariant { Sarl, Training, Model, Reward };

std::string_view to_string(TrainingVariant variant);
TrainingVariant parse_training_variant(std::string_view name);

struct VariantSettings {
    std::string name = "sarl";
    bool curriculum = false;
    int stage_length = 2000;
    double rho_step = 0.1;
    double rho_cap = 0.5;
    bool feed_rho = false;
    RewardVariant reward = RewardVariant::Default;
    RewardParams reward_params;
};

VariantSettings variant_settings(TrainingVariant variant);

/// Sarl with a constant discomfort distance other than the default.
VariantSettings fixed_discomfort_variant(double d_disc);

struct Transition {
    ValueInput state;
    ValueInput next_state;
    double reward = 0.0;
    bool terminal = false;
    /// Target-network value of next_state, valid while target_version matches.
    double cached_next_value = 0.0;
    std::uint64_t target_version = 0;
};

/// Fixed-capacity FIFO of transitions with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 100'000);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return items_.empty(); }

    /// i = 0 is the oldest retained transition.
    const Transition& operator[](std::size_t i) const;
    Transition& operator[](std::size_t i);

    /// m indices drawn uniformly with replacement.
    std::vector<std::size_t> sample(std::size_t m, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> items_;
};

struct EpisodeLog {
    int episode = 0;
    EpisodeStatus outcome = EpisodeStatus::Timeout;
    int steps = 0;
    double discounted_return = 0.0;
    double loss_mean = 0.0;
    double epsilon = 0.0;
    double rho_max = 0.0;
    double wall_seconds = 0.0;
};

struct TrainerConfig {
    TrainingHyperparams hp;
    VariantSettings variant;
    int pedestrians = 5;
    ScenarioKind scenario = ScenarioKind::CircleCrossing;
    SimConfig sim;
    int demo_episodes = 2000;
    /// Demonstrator settings; the margin keeps it clear of pedestrians that ignore it.
    OrcaParams demo_orca{.safety_margin = 0.2};
    std::size_t buffer_capacity = 100'000;
    /// Supervised epochs on discounted demo returns before value iteration (0 = none).
    int imitation_epochs = 50;
    double imitation_lr = 0.01;
    bool normalized_discount = false;
    HeadingMode heading = HeadingMode::WorldFrame;
    /// Writes checkpoints/episode_NNNNN.snck every this many episodes (0 = final only).
    int checkpoint_interval = 0;
    /// When set, receives checkpoints/ and train.csv (plus diagnostic.txt if the loss goes non-finite).
    std::optional<std::filesystem::path> out_dir;
    std::function<void(const EpisodeLog&)> on_episode;

    LookaheadConfig lookahead() const;
};

/// Fills a buffer from episodes in which the robot runs ORCA among standard ORCA
/// pedestrians; rewards come from the configured reward function.
ReplayBuffer imitation_bootstrap(const TrainerConfig& config, std::uint64_t seed, int* successes = nullptr);

struct TrainingResult {
    ValueNetwork net;
    nn::Checkpoint checkpoint;
    std::vector<EpisodeLog> log;
};

/// Targets y = r (terminal) or r + discount * V_target(s'); reuses cached values
/// while the target network is unchanged.
Eigen::VectorXd compute_targets(ReplayBuffer& buffer, std::span<const std::size_t> idx, const ValueNetwork& target,
                                std::uint64_t target_version, double discount);

/// Value iteration: curriculum scenarios, epsilon-greedy lookahead rollouts, one
/// SGD-momentum step per environment step, target copies every target_update episodes.
/// Throws NonFiniteError (after writing diagnostic.txt) when the loss diverges.
TrainingResult train_value_network(const TrainerConfig& config, std::uint64_t seed);

/// Lookahead settings stored in a policy checkpoint.
LookaheadConfig lookahead_from_checkpoint(const nn::Checkpoint& checkpoint);

void write_training_log_header(std::ostream& out);
void write_training_log_row(std::ostream& out, const EpisodeLog& row);

}  // namespace socnav
