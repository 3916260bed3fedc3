#include "socnav/mlp.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "socnav/error.hpp"

namespace socnav::nn {
namespace {

std::uint64_t next_stamp() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

}  // namespace

std::size_t MlpSpec::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        n += static_cast<std::size_t>(widths[l + 1]) * (static_cast<std::size_t>(widths[l]) + 1);
    return n;
}

void MlpSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least one linear layer");
    for (const int w : widths)
        if (w <= 0) throw std::invalid_argument("MLP widths must be positive");
}

MlpGradients MlpGradients::zeros(const MlpSpec& spec) {
    MlpGradients g;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        g.weights.push_back(Matrix::Zero(spec.widths[l + 1], spec.widths[l]));
        g.biases.push_back(Vector::Zero(spec.widths[l + 1]));
    }
    return g;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

MlpGradients& MlpGradients::operator*=(double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] *= s;
        biases[l] *= s;
    }
    return *this;
}

bool MlpGradients::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
        weights_.push_back(Matrix::Zero(spec_.widths[l + 1], spec_.widths[l]));
        biases_.push_back(Vector::Zero(spec_.widths[l + 1]));
    }
    reset_momentum();
    touch();
}

Mlp Mlp::initialized(const MlpSpec& spec, Rng& rng) {
    Mlp net(spec);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.widths[l]));
        Matrix& w = net.weights_[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
        for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) net.biases_[l](r) = rng.uniform(-bound, bound);
    }
    net.touch();
    return net;
}

Matrix& Mlp::mutable_weight(std::size_t layer) {
    touch();
    return weights_[layer];
}

Vector& Mlp::mutable_bias(std::size_t layer) {
    touch();
    return biases_[layer];
}

void Mlp::touch() { stamp_ = next_stamp(); }

MlpCache Mlp::forward(const Matrix& input) const {
    if (input.rows() != spec_.input_width())
        throw DimensionError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                             std::to_string(spec_.input_width()));
    MlpCache cache;
    cache.stamp = stamp_;
    cache.layer_inputs.reserve(layer_count());
    cache.pre_activations.reserve(layer_count());
    Matrix x = input;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Matrix z = weights_[l] * x;
        z.colwise() += biases_[l];
        cache.layer_inputs.push_back(std::move(x));
        const bool relu = l + 1 < layer_count() || spec_.output_relu;
        x = relu ? Matrix(z.cwiseMax(0.0)) : z;
        cache.pre_activations.push_back(std::move(z));
    }
    cache.output = std::move(x);
    return cache;
}

Matrix Mlp::predict(const Matrix& input) const {
    if (input.rows() != spec_.input_width())
        throw DimensionError("MLP input has " + std::to_string(input.rows()) + " rows, expected " +
                             std::to_string(spec_.input_width()));
    Matrix x = input;
    for (std::size_t l = 0; l < layer_count(); ++l) {
        Matrix z = weights_[l] * x;
        z.colwise() += biases_[l];
        const bool relu = l + 1 < layer_count() || spec_.output_relu;
        x = relu ? Matrix(z.cwiseMax(0.0)) : std::move(z);
    }
    return x;
}

Vector Mlp::predict(const Vector& input) const {
    const Matrix out = predict(Matrix(input));
    return out.col(0);
}

MlpBackward Mlp::backward(const MlpCache& cache, const Matrix& output_gradient, bool want_input_gradient) const {
    if (cache.stamp != stamp_) throw StaleCacheError("backward pass uses a cache from before a parameter update");
    if (output_gradient.rows() != cache.output.rows() || output_gradient.cols() != cache.output.cols())
        throw DimensionError("output gradient shape does not match the forward output");

    MlpBackward result;
    result.gradients.weights.resize(layer_count());
    result.gradients.biases.resize(layer_count());
    Matrix delta = output_gradient;
    for (std::size_t l = layer_count(); l-- > 0;) {
        const bool relu = l + 1 < layer_count() || spec_.output_relu;
        if (relu) delta = delta.cwiseProduct((cache.pre_activations[l].array() > 0.0).cast<double>().matrix());
        result.gradients.weights[l].noalias() = delta * cache.layer_inputs[l].transpose();
        result.gradients.biases[l] = delta.rowwise().sum();
        if (l > 0 || want_input_gradient) {
            Matrix next = weights_[l].transpose() * delta;
            delta = std::move(next);
        }
    }
    if (want_input_gradient) result.input_gradient = std::move(delta);
    return result;
}

void Mlp::sgd_momentum_step(const MlpGradients& gradients, double lr, double momentum) {
    if (gradients.weights.size() != layer_count()) throw ShapeMismatchError("gradient layer count mismatch");
    for (std::size_t l = 0; l < layer_count(); ++l) {
        if (gradients.weights[l].rows() != weights_[l].rows() || gradients.weights[l].cols() != weights_[l].cols() ||
            gradients.biases[l].size() != biases_[l].size())
            throw ShapeMismatchError("gradient shape mismatch in layer " + std::to_string(l));
    }
    if (!gradients.all_finite()) throw NonFiniteError("non-finite gradient; refusing to update parameters");
    for (std::size_t l = 0; l < layer_count(); ++l) {
        momentum_weights_[l] = momentum * momentum_weights_[l] + gradients.weights[l];
        momentum_biases_[l] = momentum * momentum_biases_[l] + gradients.biases[l];
        weights_[l] -= lr * momentum_weights_[l];
        biases_[l] -= lr * momentum_biases_[l];
    }
    touch();
}

void Mlp::reset_momentum() {
    momentum_weights_.clear();
    momentum_biases_.clear();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        momentum_weights_.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
        momentum_biases_.push_back(Vector::Zero(biases_[l].size()));
    }
}

bool Mlp::all_finite() const {
    for (std::size_t l = 0; l < layer_count(); ++l)
        if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
    return true;
}

void Mlp::copy_parameters_from(const Mlp& other) {
    if (!(other.spec_ == spec_)) throw ShapeMismatchError("cannot copy parameters between different MLP specs");
    weights_ = other.weights_;
    biases_ = other.biases_;
    stamp_ = other.stamp_;
}

double mse_loss(const Matrix& predictions, const Matrix& targets, Matrix* gradient) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw DimensionError("prediction and target shapes differ");
    const Matrix diff = predictions - targets;
    const double n = static_cast<double>(diff.size());
    if (gradient) *gradient = (2.0 / n) * diff;
    return diff.squaredNorm() / n;
}

}  // namespace socnav::nn
