#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "socnav/rng.hpp"

namespace socnav::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Layer widths of a fully connected stack. ReLU follows every linear layer
/// except the last, which is identity unless output_relu is set.
struct MlpSpec {
    std::vector<int> widths;
    bool output_relu = false;

    int input_width() const { return widths.front(); }
    int output_width() const { return widths.back(); }
    std::size_t layer_count() const { return widths.size() - 1; }
    std::size_t parameter_count() const;

    /// Throws std::invalid_argument unless there is at least one layer and all widths are positive.
    void validate() const;

    bool operator==(const MlpSpec&) const = default;
};

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    static MlpGradients zeros(const MlpSpec& spec);
    MlpGradients& operator+=(const MlpGradients& other);
    MlpGradients& operator*=(double s);
    bool all_finite() const;
};

/// Activations of one forward pass, tagged with the parameter stamp they were computed with.
struct MlpCache {
    std::uint64_t stamp = 0;
    std::vector<Matrix> layer_inputs;     ///< input to layer l (post-activation of l - 1)
    std::vector<Matrix> pre_activations;  ///< W_l x + b_l
    Matrix output;
};

struct MlpBackward {
    MlpGradients gradients;
    Matrix input_gradient;  ///< empty when not requested
};

/// Parameters and momentum buffers of one MLP (64-bit floats). Inputs are
/// matrices whose columns are samples.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(MlpSpec spec);

    /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    static Mlp initialized(const MlpSpec& spec, Rng& rng);

    const MlpSpec& spec() const { return spec_; }
    std::size_t layer_count() const { return weights_.size(); }

    const Matrix& weight(std::size_t layer) const { return weights_[layer]; }
    const Vector& bias(std::size_t layer) const { return biases_[layer]; }
    /// Mutable access invalidates outstanding caches.
    Matrix& mutable_weight(std::size_t layer);
    Vector& mutable_bias(std::size_t layer);

    std::uint64_t stamp() const { return stamp_; }

    /// Throws DimensionError if input.rows() differs from the input width.
    MlpCache forward(const Matrix& input) const;
    Matrix predict(const Matrix& input) const;
    Vector predict(const Vector& input) const;

    /// Reverse-mode gradients for d(loss)/d(output) = output_gradient.
    /// Throws StaleCacheError when parameters changed since the forward pass.
    MlpBackward backward(const MlpCache& cache, const Matrix& output_gradient, bool want_input_gradient = true) const;

    /// buffer <- momentum * buffer + gradient; param <- param - lr * buffer.
    /// Throws NonFiniteError (leaving parameters untouched) on NaN/Inf gradients.
    void sgd_momentum_step(const MlpGradients& gradients, double lr, double momentum);
    void reset_momentum();

    bool all_finite() const;

    /// Copies parameters (not momentum) from another network of the same spec.
    void copy_parameters_from(const Mlp& other);

private:
    void touch();

    MlpSpec spec_;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
    std::vector<Matrix> momentum_weights_;
    std::vector<Vector> momentum_biases_;
    std::uint64_t stamp_ = 0;
};

/// Mean squared error and its gradient with respect to predictions.
double mse_loss(const Matrix& predictions, const Matrix& targets, Matrix* gradient = nullptr);

}  // namespace socnav::nn
