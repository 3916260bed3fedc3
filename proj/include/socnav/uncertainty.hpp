#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "socnav/mlp.hpp"
#include "socnav/track_history.hpp"
#include "socnav/world.hpp"

namespace socnav {

inline constexpr int kMaxHistorySteps = 20;

/// Layers 2t -> 150 -> 100 -> 100 -> 100 -> 50 -> 1.
nn::MlpSpec uncertainty_spec(int t);

/// Features of every t-step window of one position sequence sampled at
/// stamps k * dt, using the same arithmetic as track_features.
std::vector<std::vector<double>> window_features(std::span<const Vec2> positions, std::size_t first_step, double dt,
                                                 int t);

/// Labeled windows for one history length t. Columns are samples.
struct WindowSet {
    int t = 0;
    nn::Matrix features;  ///< 2t x n
    Eigen::VectorXd labels;

    std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
};

struct UncertaintyDataConfig {
    int episodes = 500;
    double rho_max = 1.0;
    int pedestrians = 5;
    int steps = 120;
    ScenarioKind scenario = ScenarioKind::PerpetualRandomGoals;
    std::size_t max_windows = 1'000'000;  ///< per history length
    SimConfig sim;
};

/// Post-step positions of one Noisy-ORCA pedestrian and its true rho.
struct PedestrianTrack {
    double rho = 0.0;
    std::vector<Vec2> positions;  ///< positions[j] is at stamp (j + 1) * dt
};

/// Raw rollouts; windows for each history length are cut on demand.
struct UncertaintyDataset {
    double rho_max = 0.0;
    double dt = 0.25;
    std::uint64_t seed = 0;
    std::size_t max_windows = 1'000'000;
    std::vector<PedestrianTrack> tracks;

    /// Every window of every track.
    std::size_t window_count(int t) const;

    /// Windows for history length t, balanced across rho deciles by stratified
    /// subsampling and capped at max_windows.
    WindowSet windows(int t) const;
};

/// Rolls out Noisy-ORCA crowds with rho ~ U(0, rho_max). Deterministic for a seed.
UncertaintyDataset generate_training_set(const UncertaintyDataConfig& config, std::uint64_t seed);

void write_dataset(std::ostream& out, const UncertaintyDataset& data);
UncertaintyDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const UncertaintyDataset& data);
UncertaintyDataset load_dataset(const std::filesystem::path& path);

struct UncertaintyTrainConfig {
    int epochs = 30;
    std::size_t batch = 64;
    double lr = 0.01;
    double momentum = 0.9;
    double validation_fraction = 0.1;
};

struct ModelReport {
    int t = 0;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    int best_epoch = 0;
    double train_loss = 0.0;
    double validation_mae = 0.0;
    double residual_mean = 0.0;
    double residual_std = 0.0;
    /// Fraction of validation windows whose estimate is within 0.25 of the label.
    double within_quarter = 0.0;
};

/// MSE regression of one model; keeps the parameters of the epoch with the
/// lowest validation MAE. Throws Error when either split is empty.
nn::Mlp train_uncertainty_model(const WindowSet& data, const UncertaintyTrainConfig& config, std::uint64_t seed,
                                ModelReport* report = nullptr);

/// One model for each history length (1..20).
class UncertaintyBank {
public:
    UncertaintyBank() = default;

    void set_model(int t, nn::Mlp model);
    bool has_model(int t) const;
    const nn::Mlp& model(int t) const;
    std::vector<int> available() const;
    bool complete() const { return available().size() == kMaxHistorySteps; }

    /// Window used for a history of `positions` samples: min(positions - 1, 20),
    /// stepping down to the largest trained window. nullopt when none applies.
    std::optional<int> model_for(std::size_t positions) const;

    /// Unclamped network output.
    double raw(int t, std::span<const double> features) const;

    /// Writes model_tNN.snck checkpoints plus manifest.json.
    void save(const std::filesystem::path& dir, std::span<const ModelReport> reports = {}) const;
    static UncertaintyBank load(const std::filesystem::path& dir);

private:
    std::array<std::optional<nn::Mlp>, kMaxHistorySteps> models_;
};

/// Trains the listed history lengths (all 20 when empty).
UncertaintyBank train_uncertainty_models(const UncertaintyDataset& data, const UncertaintyTrainConfig& config,
                                         std::uint64_t seed, std::span<const int> lengths = {},
                                         std::vector<ModelReport>* reports = nullptr);

struct EstimatorConfig {
    double prior = 0.0;
    /// Weight of the previous estimate in exponential smoothing; 0 disables it.
    double smoothing = 0.0;
};

struct RhoEstimate {
    double rho = 0.0;
    int model_t = 0;  ///< 0 when the prior was returned
    bool low_confidence = false;
};

/// Clamped estimate from the bank; the prior with low_confidence set when the
/// history is too short or no model applies.
RhoEstimate estimate_rho(const UncertaintyBank& bank, const TrackHistory& history, const EstimatorConfig& config = {});

/// Per-pedestrian estimator that carries smoothing state across calls.
class RhoEstimator {
public:
    explicit RhoEstimator(EstimatorConfig config = {}) : config_(config) {}
    RhoEstimate update(const UncertaintyBank& bank, const TrackHistory& history);
    void reset() { previous_.reset(); }

private:
    EstimatorConfig config_;
    std::optional<double> previous_;
};

}  // namespace socnav
