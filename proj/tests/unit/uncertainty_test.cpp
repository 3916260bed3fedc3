#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>

#include "socnav/error.hpp"
#include "socnav/observation.hpp"
#include "socnav/uncertainty.hpp"

using namespace socnav;
namespace fs = std::filesystem;

namespace {

UncertaintyDataConfig tiny_config() {
    UncertaintyDataConfig c;
    c.episodes = 6;
    c.steps = 30;
    c.pedestrians = 4;
    return c;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("socnav_unc_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::array<std::size_t, 10> decile_counts(const Eigen::VectorXd& labels, double rho_max) {
    std::array<std::size_t, 10> c{};
    for (Eigen::Index i = 0; i < labels.size(); ++i)
        ++c[static_cast<std::size_t>(std::min(9, static_cast<int>(std::floor(10.0 * labels(i) / rho_max))))];
    return c;
}

// Balanced size: smallest non-empty decile (by windows) times the number of non-empty deciles, under the cap.
std::size_t expected_balanced(const UncertaintyDataset& d, int t) {
    std::array<std::size_t, 10> per{};
    for (const auto& tr : d.tracks)
        if (tr.positions.size() > static_cast<std::size_t>(t))
            per[static_cast<std::size_t>(std::min(9, static_cast<int>(std::floor(10.0 * tr.rho / d.rho_max))))] +=
                tr.positions.size() - t;
    std::size_t k = 0, smallest = SIZE_MAX;
    for (auto n : per)
        if (n > 0) ++k, smallest = std::min(smallest, n);
    return k * std::min(smallest, d.max_windows / k);
}

void expect_balanced(const WindowSet& w, double rho_max) {
    std::size_t level = 0;
    for (auto n : decile_counts(w.labels, rho_max)) {
        if (n == 0) continue;
        if (level == 0) level = n;
        EXPECT_EQ(n, level);
    }
}

}  // namespace

TEST(Uncertainty, SpecShape) {
    EXPECT_EQ(uncertainty_spec(7).widths, (std::vector<int>{14, 150, 100, 100, 100, 50, 1}));
    EXPECT_THROW(uncertainty_spec(0), std::invalid_argument);
    EXPECT_THROW(uncertainty_spec(21), std::invalid_argument);
}

TEST(Uncertainty, WindowFeaturesMatchTrackFeatures) {
    Rng rng(1);
    std::vector<Vec2> positions;
    Vec2 p;
    for (int j = 0; j < 30; ++j) {
        p += Vec2{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
        positions.push_back(p);
    }
    for (int t : {1, 4, 20}) {
        const auto windows = window_features(positions, 1, 0.25, t);
        ASSERT_EQ(windows.size(), positions.size() - t);
        for (std::size_t w = 0; w < windows.size(); ++w) {
            TrackHistory h(0.25, t + 1);
            for (std::size_t j = w; j < w + t + 1; ++j) h.push((j + 1) * 0.25, positions[j]);
            const auto f = track_features(h, t);
            ASSERT_EQ(f, windows[w]) << "t " << t << " window " << w;
        }
    }
}

TEST(Uncertainty, DatasetIsDeterministicAndLabeled) {
    const auto a = generate_training_set(tiny_config(), 5), b = generate_training_set(tiny_config(), 5);
    ASSERT_EQ(a.tracks.size(), 24u);
    ASSERT_EQ(a.tracks.size(), b.tracks.size());
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
        EXPECT_EQ(a.tracks[i].rho, b.tracks[i].rho);
        EXPECT_EQ(a.tracks[i].positions, b.tracks[i].positions);
        EXPECT_GE(a.tracks[i].rho, 0.0);
        EXPECT_LE(a.tracks[i].rho, 1.0);
        EXPECT_EQ(a.tracks[i].positions.size(), 30u);
    }
    const WindowSet w = a.windows(5);
    EXPECT_EQ(w.features.rows(), 10);
    EXPECT_EQ(a.window_count(5), 24u * 25);
    EXPECT_EQ(w.size(), expected_balanced(a, 5));
    EXPECT_LE(w.size(), a.window_count(5));
    expect_balanced(w, a.rho_max);
}

TEST(Uncertainty, StratifiedCapBalancesDeciles) {
    UncertaintyDataset data = generate_training_set(tiny_config(), 6);
    data.max_windows = 100;
    const WindowSet w = data.windows(3);
    EXPECT_EQ(w.size(), expected_balanced(data, 3));
    EXPECT_LE(w.size(), 100u);
    EXPECT_GT(w.size(), 80u);
    expect_balanced(w, data.rho_max);
    // Reproducible subsample.
    const WindowSet w2 = data.windows(3);
    EXPECT_EQ(w.labels, w2.labels);
}

TEST(Uncertainty, DatasetStreamRoundTrip) {
    const auto a = generate_training_set(tiny_config(), 7);
    std::stringstream ss;
    write_dataset(ss, a);
    const auto b = read_dataset(ss);
    EXPECT_EQ(b.rho_max, a.rho_max);
    EXPECT_EQ(b.seed, a.seed);
    ASSERT_EQ(b.tracks.size(), a.tracks.size());
    EXPECT_EQ(b.tracks[3].positions, a.tracks[3].positions);

    std::string bytes = ss.str();
    std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
    EXPECT_THROW(read_dataset(truncated), TruncatedFileError);
}

TEST(Uncertainty, TrainingReportsAndBankRoundTrip) {
    UncertaintyDataConfig cfg = tiny_config();
    cfg.episodes = 10;
    const auto data = generate_training_set(cfg, 8);
    UncertaintyTrainConfig tc;
    tc.epochs = 3;
    std::vector<ModelReport> reports;
    const std::vector<int> lengths{1, 4};
    const UncertaintyBank bank = train_uncertainty_models(data, tc, 9, lengths, &reports);
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_EQ(bank.available(), lengths);
    EXPECT_FALSE(bank.complete());
    for (const auto& r : reports) {
        EXPECT_GT(r.n_train, 0u);
        EXPECT_GT(r.n_validation, 0u);
        EXPECT_GE(r.best_epoch, 1);
        EXPECT_LE(r.best_epoch, 3);
        EXPECT_GE(r.validation_mae, 0.0);
        EXPECT_GE(r.within_quarter, 0.0);
        EXPECT_LE(r.within_quarter, 1.0);
    }

    const fs::path dir = scratch_dir("bank");
    bank.save(dir, reports);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "model_t04.snck"));
    const UncertaintyBank loaded = UncertaintyBank::load(dir);
    EXPECT_EQ(loaded.available(), lengths);
    const std::vector<double> f{0.8, 0.9, 0.0, 0.4, 0.1, -0.2, 1.0, 0.3};
    EXPECT_EQ(loaded.raw(4, f), bank.raw(4, f));
    EXPECT_THROW(bank.raw(4, std::span(f).first(3)), DimensionError);
}

TEST(Uncertainty, ModelSelectionStepsDown) {
    UncertaintyBank bank;
    EXPECT_FALSE(bank.model_for(30).has_value());
    for (int t : {1, 5, 20}) bank.set_model(t, nn::Mlp(uncertainty_spec(t)));
    EXPECT_FALSE(bank.model_for(1).has_value());
    EXPECT_EQ(bank.model_for(2), 1);
    EXPECT_EQ(bank.model_for(5), 1);
    EXPECT_EQ(bank.model_for(6), 5);
    EXPECT_EQ(bank.model_for(20), 5);
    EXPECT_EQ(bank.model_for(21), 20);
    EXPECT_EQ(bank.model_for(400), 20);
}

TEST(Uncertainty, EstimatePriorOnShortHistoryAndClamp) {
    UncertaintyBank bank;
    nn::Mlp m(uncertainty_spec(1));
    m.mutable_bias(m.layer_count() - 1)(0) = 3.0;  // zero weights: constant output 3
    bank.set_model(1, m);
    TrackHistory h(0.25);
    EstimatorConfig cfg;
    cfg.prior = 0.2;
    h.push(0.25, {0, 0});
    const RhoEstimate short_est = estimate_rho(bank, h, cfg);
    EXPECT_TRUE(short_est.low_confidence);
    EXPECT_EQ(short_est.rho, 0.2);
    EXPECT_EQ(short_est.model_t, 0);
    h.push(0.5, {0.1, 0});
    const RhoEstimate est = estimate_rho(bank, h, cfg);
    EXPECT_FALSE(est.low_confidence);
    EXPECT_EQ(est.model_t, 1);
    EXPECT_EQ(est.rho, 1.0);
}

TEST(Uncertainty, EstimatorSmoothing) {
    UncertaintyBank bank;
    nn::Mlp m(uncertainty_spec(1));
    m.mutable_bias(m.layer_count() - 1)(0) = 0.8;
    bank.set_model(1, m);
    RhoEstimator est({0.0, 0.5});
    TrackHistory h(0.25);
    h.push(0.25, {0, 0});
    h.push(0.5, {0.1, 0});
    EXPECT_NEAR(est.update(bank, h).rho, 0.8, 1e-12);
    bank.set_model(1, [] {
        nn::Mlp z(uncertainty_spec(1));
        z.mutable_bias(z.layer_count() - 1)(0) = 0.2;
        return z;
    }());
    EXPECT_NEAR(est.update(bank, h).rho, 0.5, 1e-12);
}
