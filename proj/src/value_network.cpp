#include "socnav/value_network.hpp"

#include <cmath>

#include "socnav/error.hpp"

namespace socnav {

ValueInput make_value_input(const JointState& state, bool feed_rho, HeadingMode heading) {
    ValueInput input;
    const std::size_t n = state.pedestrians.size();
    if (feed_rho && state.rhos.size() != n) throw std::invalid_argument("one rho per pedestrian required");

    // The self-state fields do not depend on the pedestrian; compute them once.
    const RotatedObservation self = rotate_observation(state.robot, PedestrianObservable{}, heading);
    input.self << self.goal_distance, self.robot_vx, self.robot_vy, self.robot_radius, self.robot_v_pref,
        self.robot_theta;

    input.peds.resize(kPedInputWidth, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto o = rotate_observation(state.robot, state.pedestrians[i], heading).to_array();
        auto col = input.peds.col(static_cast<Eigen::Index>(i));
        for (std::size_t k = 0; k < RotatedObservation::kSize; ++k) col(static_cast<Eigen::Index>(k)) = o[k];
        col(kPedInputWidth - 1) = feed_rho ? state.rhos[i] : 0.0;
    }
    return input;
}

bool ValueNetwork::Gradients::all_finite() const {
    return mlp2.all_finite() && mlp3.all_finite() && mlp4.all_finite() && mlp5.all_finite();
}

const nn::MlpSpec& ValueNetwork::mlp2_spec() {
    static const nn::MlpSpec spec{{kPedInputWidth, 150, kEmbeddingWidth}, true};
    return spec;
}
const nn::MlpSpec& ValueNetwork::mlp3_spec() {
    static const nn::MlpSpec spec{{kEmbeddingWidth, 100, kCrowdWidth}, false};
    return spec;
}
const nn::MlpSpec& ValueNetwork::mlp4_spec() {
    static const nn::MlpSpec spec{{2 * kEmbeddingWidth, 100, 100, 1}, false};
    return spec;
}
const nn::MlpSpec& ValueNetwork::mlp5_spec() {
    static const nn::MlpSpec spec{{kSelfStateWidth + kCrowdWidth, 150, 100, 100, 1}, false};
    return spec;
}

ValueNetwork::ValueNetwork() : mlp2_(mlp2_spec()), mlp3_(mlp3_spec()), mlp4_(mlp4_spec()), mlp5_(mlp5_spec()) {}

ValueNetwork ValueNetwork::initialized(Rng& rng) {
    ValueNetwork net;
    net.mlp2_ = nn::Mlp::initialized(mlp2_spec(), rng);
    net.mlp3_ = nn::Mlp::initialized(mlp3_spec(), rng);
    net.mlp4_ = nn::Mlp::initialized(mlp4_spec(), rng);
    net.mlp5_ = nn::Mlp::initialized(mlp5_spec(), rng);
    return net;
}

ValueNetwork::Stacked ValueNetwork::stack(std::span<const ValueInput> inputs) {
    Stacked s;
    s.offsets.reserve(inputs.size() + 1);
    Eigen::Index total = 0;
    s.offsets.push_back(0);
    for (const auto& in : inputs) {
        if (in.peds.rows() != kPedInputWidth)
            throw DimensionError("pedestrian input must have " + std::to_string(kPedInputWidth) + " rows");
        total += in.peds.cols();
        s.offsets.push_back(total);
    }
    s.peds.resize(kPedInputWidth, total);
    s.selves.resize(kSelfStateWidth, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        if (inputs[b].peds.cols() > 0) s.peds.middleCols(s.offsets[b], inputs[b].peds.cols()) = inputs[b].peds;
        s.selves.col(static_cast<Eigen::Index>(b)) = inputs[b].self;
    }
    return s;
}

nn::Matrix ValueNetwork::pooled(const Stacked& s, const nn::Matrix& embeddings, const nn::Matrix& hidden,
                                const nn::Matrix& scores, nn::Matrix* attention) const {
    const auto batch = static_cast<Eigen::Index>(s.offsets.size() - 1);
    nn::Matrix joint(kSelfStateWidth + kCrowdWidth, batch);
    joint.topRows(kSelfStateWidth) = s.selves;
    if (attention) attention->resize(1, embeddings.cols());
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Eigen::Index begin = s.offsets[b];
        const Eigen::Index n = s.offsets[b + 1] - begin;
        if (n == 0) {
            joint.col(b).bottomRows(kCrowdWidth).setZero();
            continue;
        }
        const auto seg = scores.block(0, begin, 1, n);
        const double max_score = seg.maxCoeff();
        Eigen::RowVectorXd w = (seg.array() - max_score).exp().matrix();
        w /= w.sum();
        joint.col(b).bottomRows(kCrowdWidth) = hidden.middleCols(begin, n) * w.transpose();
        if (attention) attention->block(0, begin, 1, n) = w;
    }
    return joint;
}

namespace {

/// [E; mean of E over each state's segment], column by column.
nn::Matrix with_segment_means(const nn::Matrix& embeddings, const std::vector<Eigen::Index>& offsets) {
    nn::Matrix g(2 * embeddings.rows(), embeddings.cols());
    g.topRows(embeddings.rows()) = embeddings;
    for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
        const Eigen::Index begin = offsets[b];
        const Eigen::Index n = offsets[b + 1] - begin;
        if (n == 0) continue;
        const Eigen::VectorXd mean = embeddings.middleCols(begin, n).rowwise().mean();
        g.bottomRows(embeddings.rows()).middleCols(begin, n) = mean.replicate(1, n);
    }
    return g;
}

}  // namespace

Eigen::VectorXd ValueNetwork::values(std::span<const ValueInput> inputs) const {
    if (inputs.empty()) return {};
    const Stacked s = stack(inputs);
    nn::Matrix joint;
    if (s.peds.cols() > 0) {
        const nn::Matrix e = mlp2_.predict(s.peds);
        const nn::Matrix h = mlp3_.predict(e);
        const nn::Matrix scores = mlp4_.predict(with_segment_means(e, s.offsets));
        joint = pooled(s, e, h, scores, nullptr);
    } else {
        joint = nn::Matrix::Zero(kSelfStateWidth + kCrowdWidth, static_cast<Eigen::Index>(inputs.size()));
        joint.topRows(kSelfStateWidth) = s.selves;
    }
    return mlp5_.predict(joint).row(0).transpose();
}

double ValueNetwork::value(const ValueInput& input) const { return values(std::span(&input, 1))(0); }

std::vector<double> ValueNetwork::attention_weights(const ValueInput& input) const {
    const BatchPass pass = forward(std::span(&input, 1));
    return {pass.attention.data(), pass.attention.data() + pass.attention.size()};
}

ValueNetwork::BatchPass ValueNetwork::forward(std::span<const ValueInput> inputs) const {
    const Stacked s = stack(inputs);
    BatchPass pass;
    pass.offsets = s.offsets;
    nn::Matrix joint;
    if (s.peds.cols() > 0) {
        pass.mlp2 = mlp2_.forward(s.peds);
        pass.mlp3 = mlp3_.forward(pass.mlp2.output);
        pass.mlp4 = mlp4_.forward(with_segment_means(pass.mlp2.output, s.offsets));
        joint = pooled(s, pass.mlp2.output, pass.mlp3.output, pass.mlp4.output, &pass.attention);
    } else {
        joint = nn::Matrix::Zero(kSelfStateWidth + kCrowdWidth, static_cast<Eigen::Index>(inputs.size()));
        joint.topRows(kSelfStateWidth) = s.selves;
        pass.attention.resize(1, 0);
    }
    pass.mlp5 = mlp5_.forward(joint);
    pass.values = pass.mlp5.output.row(0).transpose();
    return pass;
}

ValueNetwork::Gradients ValueNetwork::backward(const BatchPass& pass, const Eigen::VectorXd& value_gradient) const {
    const auto batch = static_cast<Eigen::Index>(pass.offsets.size() - 1);
    if (value_gradient.size() != batch) throw DimensionError("one value gradient per batch element required");

    Gradients g;
    const nn::MlpBackward top = mlp5_.backward(pass.mlp5, value_gradient.transpose(), true);
    g.mlp5 = top.gradients;

    const Eigen::Index total = pass.offsets.back();
    if (total == 0) {
        g.mlp2 = nn::MlpGradients::zeros(mlp2_spec());
        g.mlp3 = nn::MlpGradients::zeros(mlp3_spec());
        g.mlp4 = nn::MlpGradients::zeros(mlp4_spec());
        return g;
    }

    const nn::Matrix& hidden = pass.mlp3.output;  // 50 x N
    nn::Matrix d_hidden(kCrowdWidth, total);
    nn::Matrix d_scores(1, total);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Eigen::Index begin = pass.offsets[b];
        const Eigen::Index n = pass.offsets[b + 1] - begin;
        if (n == 0) continue;
        const Eigen::VectorXd dc = top.input_gradient.col(b).bottomRows(kCrowdWidth);
        const Eigen::RowVectorXd w = pass.attention.block(0, begin, 1, n);
        d_hidden.middleCols(begin, n) = dc * w;
        const Eigen::RowVectorXd dw = dc.transpose() * hidden.middleCols(begin, n);
        const double weighted = (w.array() * dw.array()).sum();
        d_scores.block(0, begin, 1, n) = (w.array() * (dw.array() - weighted)).matrix();
    }

    const nn::MlpBackward scores_back = mlp4_.backward(pass.mlp4, d_scores, true);
    g.mlp4 = scores_back.gradients;
    const nn::MlpBackward hidden_back = mlp3_.backward(pass.mlp3, d_hidden, true);
    g.mlp3 = hidden_back.gradients;

    nn::Matrix d_embed = scores_back.input_gradient.topRows(kEmbeddingWidth) + hidden_back.input_gradient;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Eigen::Index begin = pass.offsets[b];
        const Eigen::Index n = pass.offsets[b + 1] - begin;
        if (n == 0) continue;
        const Eigen::VectorXd d_mean =
            scores_back.input_gradient.bottomRows(kEmbeddingWidth).middleCols(begin, n).rowwise().sum() /
            static_cast<double>(n);
        d_embed.middleCols(begin, n).colwise() += d_mean;
    }
    g.mlp2 = mlp2_.backward(pass.mlp2, d_embed, false).gradients;
    return g;
}

void ValueNetwork::sgd_momentum_step(const Gradients& gradients, double lr, double momentum) {
    if (!gradients.all_finite()) throw NonFiniteError("non-finite value-network gradient");
    mlp2_.sgd_momentum_step(gradients.mlp2, lr, momentum);
    mlp3_.sgd_momentum_step(gradients.mlp3, lr, momentum);
    mlp4_.sgd_momentum_step(gradients.mlp4, lr, momentum);
    mlp5_.sgd_momentum_step(gradients.mlp5, lr, momentum);
}

void ValueNetwork::copy_parameters_from(const ValueNetwork& other) {
    mlp2_.copy_parameters_from(other.mlp2_);
    mlp3_.copy_parameters_from(other.mlp3_);
    mlp4_.copy_parameters_from(other.mlp4_);
    mlp5_.copy_parameters_from(other.mlp5_);
}

nn::Checkpoint ValueNetwork::to_checkpoint(const nn::CheckpointMetadata& metadata) const {
    nn::Checkpoint ckpt;
    ckpt.metadata = metadata;
    ckpt.nets = {{"mlp2", mlp2_}, {"mlp3", mlp3_}, {"mlp4", mlp4_}, {"mlp5", mlp5_}};
    return ckpt;
}

ValueNetwork ValueNetwork::from_checkpoint(const nn::Checkpoint& checkpoint) {
    ValueNetwork net;
    auto take = [&](const char* name, const nn::MlpSpec& spec, nn::Mlp& dst) {
        for (const auto& n : checkpoint.nets) {
            if (n.name != name) continue;
            if (!(n.net.spec() == spec))
                throw ShapeMismatchError(std::string("checkpoint network '") + name + "' has incompatible widths");
            dst = n.net;
            dst.reset_momentum();
            return;
        }
        throw ShapeMismatchError(std::string("checkpoint lacks value-network component '") + name + "'");
    };
    take("mlp2", mlp2_spec(), net.mlp2_);
    take("mlp3", mlp3_spec(), net.mlp3_);
    take("mlp4", mlp4_spec(), net.mlp4_);
    take("mlp5", mlp5_spec(), net.mlp5_);
    return net;
}

}  // namespace socnav
