#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "socnav/checkpoint.hpp"
#include "socnav/mlp.hpp"
#include "socnav/observation.hpp"
#include "socnav/rng.hpp"

namespace socnav {

inline constexpr int kSelfStateWidth = 6;
inline constexpr int kPedInputWidth = 14;  // 13 rotated fields + rho
inline constexpr int kEmbeddingWidth = 100;
inline constexpr int kCrowdWidth = 50;

/// Network input for one joint state: the 6-field robot self state and one
/// 14-row column per pedestrian.
struct ValueInput {
    Eigen::Matrix<double, kSelfStateWidth, 1> self = Eigen::Matrix<double, kSelfStateWidth, 1>::Zero();
    nn::Matrix peds = nn::Matrix(kPedInputWidth, 0);

    std::size_t pedestrian_count() const { return static_cast<std::size_t>(peds.cols()); }
};

/// Rotates every pedestrian into the robot frame and appends its rho (or 0 when
/// feed_rho is false).
ValueInput make_value_input(const JointState& state, bool feed_rho, HeadingMode heading = HeadingMode::WorldFrame);

/// Attention-pooled crowd value network:
///   e_i = mlp2(x_i), h_i = mlp3(e_i), score_i = mlp4([e_i; mean_j e_j]),
///   c = sum_i softmax(score)_i h_i, value = mlp5([self; c]).
class ValueNetwork {
public:
    struct Gradients {
        nn::MlpGradients mlp2, mlp3, mlp4, mlp5;
        bool all_finite() const;
    };

    /// Activations kept for a batched backward pass.
    struct BatchPass {
        std::vector<Eigen::Index> offsets;  ///< pedestrian column range of state b: [offsets[b], offsets[b + 1])
        nn::MlpCache mlp2, mlp3, mlp4, mlp5;
        nn::Matrix attention;  ///< 1 x N softmax weights
        Eigen::VectorXd values;
    };

    static const nn::MlpSpec& mlp2_spec();
    static const nn::MlpSpec& mlp3_spec();
    static const nn::MlpSpec& mlp4_spec();
    static const nn::MlpSpec& mlp5_spec();

    /// Zero parameters.
    ValueNetwork();
    static ValueNetwork initialized(Rng& rng);

    double value(const ValueInput& input) const;
    Eigen::VectorXd values(std::span<const ValueInput> inputs) const;
    std::vector<double> attention_weights(const ValueInput& input) const;

    BatchPass forward(std::span<const ValueInput> inputs) const;
    Gradients backward(const BatchPass& pass, const Eigen::VectorXd& value_gradient) const;
    void sgd_momentum_step(const Gradients& gradients, double lr, double momentum);
    void copy_parameters_from(const ValueNetwork& other);

    nn::Mlp& mlp2() { return mlp2_; }
    nn::Mlp& mlp3() { return mlp3_; }
    nn::Mlp& mlp4() { return mlp4_; }
    nn::Mlp& mlp5() { return mlp5_; }
    const nn::Mlp& mlp2() const { return mlp2_; }
    const nn::Mlp& mlp3() const { return mlp3_; }
    const nn::Mlp& mlp4() const { return mlp4_; }
    const nn::Mlp& mlp5() const { return mlp5_; }

    nn::Checkpoint to_checkpoint(const nn::CheckpointMetadata& metadata = {}) const;
    /// Throws ShapeMismatchError if a network is missing or has the wrong widths.
    static ValueNetwork from_checkpoint(const nn::Checkpoint& checkpoint);

private:
    struct Stacked {
        nn::Matrix peds;
        nn::Matrix selves;
        std::vector<Eigen::Index> offsets;
    };
    static Stacked stack(std::span<const ValueInput> inputs);
    nn::Matrix pooled(const Stacked& s, const nn::Matrix& embeddings, const nn::Matrix& hidden,
                      const nn::Matrix& scores, nn::Matrix* attention) const;

    nn::Mlp mlp2_, mlp3_, mlp4_, mlp5_;
};

}  // namespace socnav
