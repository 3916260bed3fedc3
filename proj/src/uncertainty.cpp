#include "socnav/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "socnav/checkpoint.hpp"
#include "socnav/error.hpp"
#include "socnav/observation.hpp"

namespace socnav {

nn::MlpSpec uncertainty_spec(int t) {
    if (t < 1 || t > kMaxHistorySteps) throw std::invalid_argument("history length must be in [1, 20]");
    return nn::MlpSpec{{2 * t, 150, 100, 100, 100, 50, 1}, false};
}

std::vector<std::vector<double>> window_features(std::span<const Vec2> positions, std::size_t first_step, double dt,
                                                 int t) {
    if (t < 1 || t > kMaxHistorySteps) throw std::invalid_argument("history length must be in [1, 20]");
    const auto needed = static_cast<std::size_t>(t) + 1;
    std::vector<std::vector<double>> out;
    if (positions.size() < needed) return out;

    const auto stamp = [&](std::size_t j) { return static_cast<double>(static_cast<int>(first_step + j)) * dt; };
    std::vector<double> speeds(positions.size() - 1);
    for (std::size_t j = 0; j + 1 < positions.size(); ++j)
        speeds[j] = norm(positions[j + 1] - positions[j]) / (stamp(j + 1) - stamp(j));

    out.reserve(positions.size() - needed + 1);
    for (std::size_t first = 0; first + needed <= positions.size(); ++first) {
        std::vector<double> f(2 * static_cast<std::size_t>(t), 0.0);
        for (int k = 0; k < t; ++k) f[k] = speeds[first + k];
        for (int k = 1; k < t; ++k) f[t + k] = (f[k] - f[k - 1]) / (stamp(first + k + 1) - stamp(first + k));
        out.push_back(std::move(f));
    }
    return out;
}

UncertaintyDataset generate_training_set(const UncertaintyDataConfig& config, std::uint64_t seed) {
    if (!(config.rho_max >= 0.0 && config.rho_max <= 1.0)) throw std::invalid_argument("rho_max must lie in [0, 1]");
    if (config.episodes < 0 || config.pedestrians < 0 || config.steps < 0)
        throw std::invalid_argument("episode, pedestrian and step counts must be non-negative");

    CrowdSpec crowd;
    crowd.policy = PolicyTag::NoisyOrca;
    crowd.rho_max = config.rho_max;

    UncertaintyDataset data;
    data.rho_max = config.rho_max;
    data.dt = config.sim.dt;
    data.seed = seed;
    data.max_windows = config.max_windows;
    data.tracks.reserve(static_cast<std::size_t>(config.episodes * config.pedestrians));

    for (int e = 0; e < config.episodes; ++e) {
        WorldState world = generate_scenario(config.scenario, config.pedestrians,
                                             derive_seed(seed, "uncertainty_episode", static_cast<std::uint64_t>(e)),
                                             config.sim, crowd);
        const std::size_t first = data.tracks.size();
        for (const auto& p : world.pedestrians) {
            PedestrianTrack track;
            track.rho = p.rho;
            track.positions.reserve(static_cast<std::size_t>(config.steps));
            data.tracks.push_back(std::move(track));
        }
        for (int s = 0; s < config.steps; ++s) {
            step_environment(world, DiscreteAction{});
            for (std::size_t i = 0; i < world.pedestrians.size(); ++i)
                data.tracks[first + i].positions.push_back(world.pedestrians[i].state.position());
        }
    }
    return data;
}

std::size_t UncertaintyDataset::window_count(int t) const {
    std::size_t n = 0;
    for (const auto& track : tracks)
        if (track.positions.size() > static_cast<std::size_t>(t)) n += track.positions.size() - static_cast<std::size_t>(t);
    return n;
}

WindowSet UncertaintyDataset::windows(int t) const {
    // Bucket track indices by rho decile; every window of a track shares its label.
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, 10> buckets;  // (track, window)
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto& track = tracks[i];
        if (track.positions.size() <= static_cast<std::size_t>(t)) continue;
        const int decile =
            rho_max > 0.0 ? std::min(9, static_cast<int>(std::floor(10.0 * track.rho / rho_max))) : 0;
        for (std::size_t w = 0; w + static_cast<std::size_t>(t) < track.positions.size(); ++w)
            buckets[static_cast<std::size_t>(decile)].emplace_back(i, w);
    }
    std::size_t non_empty = 0;
    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    for (const auto& b : buckets) {
        if (b.empty()) continue;
        ++non_empty;
        smallest = std::min(smallest, b.size());
    }

    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    if (non_empty > 0) {
        const std::size_t per_bucket = std::min(smallest, max_windows / non_empty);
        Rng rng = Rng::stream(seed, "stratify", static_cast<std::uint64_t>(t));
        for (auto& b : buckets) {
            if (b.empty()) continue;
            // Partial Fisher-Yates, then restore chronological order.
            for (std::size_t k = 0; k < per_bucket; ++k) std::swap(b[k], b[k + rng.index(b.size() - k)]);
            std::vector<std::pair<std::size_t, std::size_t>> keep(b.begin(), b.begin() + static_cast<long>(per_bucket));
            std::sort(keep.begin(), keep.end());
            chosen.insert(chosen.end(), keep.begin(), keep.end());
        }
        std::sort(chosen.begin(), chosen.end());
    }

    WindowSet set;
    set.t = t;
    set.features.resize(2 * t, static_cast<Eigen::Index>(chosen.size()));
    set.labels.resize(static_cast<Eigen::Index>(chosen.size()));
    std::size_t cached_track = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<double>> cached;
    for (std::size_t c = 0; c < chosen.size(); ++c) {
        const auto [track, w] = chosen[c];
        if (track != cached_track) {
            cached = window_features(tracks[track].positions, 1, dt, t);
            cached_track = track;
        }
        const auto col = static_cast<Eigen::Index>(c);
        for (int r = 0; r < 2 * t; ++r) set.features(r, col) = cached[w][static_cast<std::size_t>(r)];
        set.labels(col) = tracks[track].rho;
    }
    return set;
}

namespace {

constexpr char kDatasetMagic[4] = {'S', 'N', 'U', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw TruncatedFileError("uncertainty dataset is truncated");
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void write_dataset(std::ostream& out, const UncertaintyDataset& data) {
    out.write(kDatasetMagic, 4);
    put<std::uint32_t>(out, kDatasetVersion);
    put<double>(out, data.rho_max);
    put<double>(out, data.dt);
    put<std::uint64_t>(out, data.seed);
    put<std::uint64_t>(out, data.max_windows);
    put<std::uint64_t>(out, data.tracks.size());
    for (const auto& track : data.tracks) {
        put<double>(out, track.rho);
        put<std::uint64_t>(out, track.positions.size());
        for (const auto& p : track.positions) {
            put<double>(out, p.x);
            put<double>(out, p.y);
        }
    }
}

UncertaintyDataset read_dataset(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw TruncatedFileError("uncertainty dataset is truncated");
    if (std::memcmp(magic, kDatasetMagic, 4) != 0) throw Error("not an uncertainty dataset");
    const auto version = get<std::uint32_t>(in);
    if (version != kDatasetVersion) throw CheckpointVersionError(version, kDatasetVersion);
    UncertaintyDataset data;
    data.rho_max = get<double>(in);
    data.dt = get<double>(in);
    data.seed = get<std::uint64_t>(in);
    data.max_windows = get<std::uint64_t>(in);
    const auto n = get<std::uint64_t>(in);
    data.tracks.resize(n);
    for (auto& track : data.tracks) {
        track.rho = get<double>(in);
        const auto m = get<std::uint64_t>(in);
        track.positions.resize(m);
        for (auto& p : track.positions) {
            p.x = get<double>(in);
            p.y = get<double>(in);
        }
    }
    return data;
}

void save_dataset(const std::filesystem::path& path, const UncertaintyDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_dataset(out, data);
}

UncertaintyDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    return read_dataset(in);
}

namespace {

nn::Matrix gather(const nn::Matrix& m, std::span<const std::size_t> idx) {
    nn::Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(idx[k]));
    return out;
}

}  // namespace

nn::Mlp train_uncertainty_model(const WindowSet& data, const UncertaintyTrainConfig& config, std::uint64_t seed,
                                ModelReport* report) {
    const std::size_t n = data.size();
    const auto n_val = static_cast<std::size_t>(std::ceil(config.validation_fraction * static_cast<double>(n)));
    if (n_val == 0 || n_val >= n)
        throw Error(fmt::format("uncertainty model t = {}: empty training or validation split ({} windows)", data.t, n));
    if (config.batch == 0 || config.epochs < 1) throw ConfigError("uncertainty training needs batch >= 1 and epochs >= 1");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = Rng::stream(seed, "split", static_cast<std::uint64_t>(data.t));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[split_rng.index(i + 1)]);
    const std::span<const std::size_t> val_idx(order.data(), n_val);
    std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());

    const nn::Matrix val_x = gather(data.features, val_idx);
    Eigen::VectorXd val_y(static_cast<Eigen::Index>(n_val));
    for (std::size_t k = 0; k < n_val; ++k) val_y(static_cast<Eigen::Index>(k)) = data.labels(static_cast<Eigen::Index>(val_idx[k]));

    Rng init_rng = Rng::stream(seed, "init", static_cast<std::uint64_t>(data.t));
    Rng shuffle_rng = Rng::stream(seed, "shuffle", static_cast<std::uint64_t>(data.t));
    nn::Mlp net = nn::Mlp::initialized(uncertainty_spec(data.t), init_rng);
    nn::Mlp best = net;
    double best_mae = std::numeric_limits<double>::infinity();
    ModelReport r;
    r.t = data.t;
    r.n_train = train_idx.size();
    r.n_validation = n_val;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = train_idx.size() - 1; i > 0; --i) std::swap(train_idx[i], train_idx[shuffle_rng.index(i + 1)]);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch) {
            const std::size_t len = std::min(config.batch, train_idx.size() - start);
            const std::span<const std::size_t> idx(train_idx.data() + start, len);
            const nn::Matrix x = gather(data.features, idx);
            nn::Matrix y(1, static_cast<Eigen::Index>(len));
            for (std::size_t k = 0; k < len; ++k) y(0, static_cast<Eigen::Index>(k)) = data.labels(static_cast<Eigen::Index>(idx[k]));
            const nn::MlpCache cache = net.forward(x);
            nn::Matrix grad;
            loss_sum += nn::mse_loss(cache.output, y, &grad);
            ++batches;
            net.sgd_momentum_step(net.backward(cache, grad, false).gradients, config.lr, config.momentum);
        }
        if (!std::isfinite(loss_sum)) throw NonFiniteError(fmt::format("uncertainty model t = {}: non-finite loss", data.t));

        const Eigen::ArrayXd pred = net.predict(val_x).row(0).transpose().array().min(1.0).max(0.0);
        const double mae = (pred - val_y.array()).abs().mean();
        if (mae < best_mae) {
            best_mae = mae;
            best = net;
            r.best_epoch = epoch;
            r.train_loss = loss_sum / static_cast<double>(batches);
        }
    }

    const Eigen::ArrayXd pred = best.predict(val_x).row(0).transpose().array().min(1.0).max(0.0);
    const Eigen::ArrayXd residual = pred - val_y.array();
    r.validation_mae = residual.abs().mean();
    r.residual_mean = residual.mean();
    r.residual_std = std::sqrt((residual - r.residual_mean).square().mean());
    r.within_quarter = (residual.abs() <= 0.25).cast<double>().mean();
    if (report) *report = r;
    best.reset_momentum();
    return best;
}

void UncertaintyBank::set_model(int t, nn::Mlp model) {
    if (!(model.spec() == uncertainty_spec(t)))
        throw ShapeMismatchError(fmt::format("model for t = {} has the wrong widths", t));
    models_[static_cast<std::size_t>(t - 1)] = std::move(model);
}

bool UncertaintyBank::has_model(int t) const {
    return t >= 1 && t <= kMaxHistorySteps && models_[static_cast<std::size_t>(t - 1)].has_value();
}

const nn::Mlp& UncertaintyBank::model(int t) const {
    if (!has_model(t)) throw std::out_of_range(fmt::format("no uncertainty model for t = {}", t));
    return *models_[static_cast<std::size_t>(t - 1)];
}

std::vector<int> UncertaintyBank::available() const {
    std::vector<int> out;
    for (int t = 1; t <= kMaxHistorySteps; ++t)
        if (has_model(t)) out.push_back(t);
    return out;
}

std::optional<int> UncertaintyBank::model_for(std::size_t positions) const {
    if (positions < 2) return std::nullopt;
    for (int t = static_cast<int>(std::min<std::size_t>(positions - 1, kMaxHistorySteps)); t >= 1; --t)
        if (has_model(t)) return t;
    return std::nullopt;
}

double UncertaintyBank::raw(int t, std::span<const double> features) const {
    const nn::Mlp& net = model(t);
    if (features.size() != static_cast<std::size_t>(2 * t)) throw DimensionError("feature length must be 2t");
    const Eigen::Map<const Eigen::VectorXd> x(features.data(), static_cast<Eigen::Index>(features.size()));
    return net.predict(Eigen::VectorXd(x))(0);
}

void UncertaintyBank::save(const std::filesystem::path& dir, std::span<const ModelReport> reports) const {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["format"] = "socnav-uncertainty-bank";
    manifest["version"] = 1;
    manifest["models"] = nlohmann::ordered_json::array();
    for (int t : available()) {
        const std::string file = fmt::format("model_t{:02d}.snck", t);
        nn::Checkpoint ckpt;
        ckpt.nets.push_back({"mlp1", model(t)});
        ckpt.metadata.extra["history_steps"] = std::to_string(t);
        nn::save_checkpoint(dir / file, ckpt);
        nlohmann::ordered_json entry{{"t", t}, {"file", file}};
        for (const auto& r : reports) {
            if (r.t != t) continue;
            entry["validation_mae"] = r.validation_mae;
            entry["residual_std"] = r.residual_std;
            entry["n_train"] = r.n_train;
            entry["n_validation"] = r.n_validation;
        }
        manifest["models"].push_back(std::move(entry));
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

UncertaintyBank UncertaintyBank::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error("missing uncertainty bank manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed uncertainty bank manifest: ") + e.what());
    }
    UncertaintyBank bank;
    for (const auto& entry : manifest.at("models")) {
        const int t = entry.at("t").get<int>();
        const nn::Checkpoint ckpt = nn::load_checkpoint(dir / entry.at("file").get<std::string>());
        bank.set_model(t, ckpt.net("mlp1"));
    }
    return bank;
}

UncertaintyBank train_uncertainty_models(const UncertaintyDataset& data, const UncertaintyTrainConfig& config,
                                         std::uint64_t seed, std::span<const int> lengths,
                                         std::vector<ModelReport>* reports) {
    std::vector<int> ts(lengths.begin(), lengths.end());
    if (ts.empty()) {
        ts.resize(kMaxHistorySteps);
        std::iota(ts.begin(), ts.end(), 1);
    }
    UncertaintyBank bank;
    for (int t : ts) {
        ModelReport r;
        bank.set_model(t, train_uncertainty_model(data.windows(t), config, seed, &r));
        if (reports) reports->push_back(r);
    }
    return bank;
}

RhoEstimate estimate_rho(const UncertaintyBank& bank, const TrackHistory& history, const EstimatorConfig& config) {
    const std::optional<int> t = bank.model_for(history.size());
    if (!t) return {config.prior, 0, true};
    const std::vector<double> f = track_features(history, *t);
    return {std::clamp(bank.raw(*t, f), 0.0, 1.0), *t, false};
}

RhoEstimate RhoEstimator::update(const UncertaintyBank& bank, const TrackHistory& history) {
    RhoEstimate e = estimate_rho(bank, history, config_);
    if (e.low_confidence) return e;
    if (config_.smoothing > 0.0 && previous_) e.rho = config_.smoothing * *previous_ + (1.0 - config_.smoothing) * e.rho;
    previous_ = e.rho;
    return e;
}

}  // namespace socnav
