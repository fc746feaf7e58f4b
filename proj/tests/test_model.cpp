#include "nanoreg/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "nanoreg/csv.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {
namespace {

// 1 -> 1 -> 1 network with hand-picked parameters: hidden unit computes
// ReLU(x - 1), output computes 2 * hidden + 0.5.
MlpModel toy_net() {
    MlpModel m;
    m.layer_sizes = {1, 1, 1};
    m.weights = {Matrix(1, 1), Matrix(1, 1)};
    m.weights[0](0, 0) = 1.0;
    m.weights[1](0, 0) = 2.0;
    m.biases = {{-1.0}, {0.5}};
    m.feature_standardizer = Standardizer{{0.0}, {1.0}};
    m.target_standardizer = Standardizer{{0.0}, {1.0}};
    return m;
}

// Noiseless linear data: y = 2 x0 - x1 + 0.5 x2 + 3 over x in [-1, 1]^3.
Dataset linear_dataset(std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.feature_names = {"f0", "f1", "f2"};
    d.target_name = "y";
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = {u(rng), u(rng), u(rng)};
        const double y = 2.0 * x[0] - x[1] + 0.5 * x[2] + 3.0;
        d.samples.push_back({std::move(x), y, Origin::original});
    }
    return d;
}

double max_relative_gap(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    auto update = [&](double x, double y) {
        const double denom = std::max(std::abs(x) + std::abs(y), 1e-8);
        worst = std::max(worst, std::abs(x - y) / denom);
    };
    EXPECT_EQ(a.weights.size(), b.weights.size());
    for (std::size_t t = 0; t < a.weights.size(); ++t) {
        EXPECT_EQ(a.weights[t].data.size(), b.weights[t].data.size());
        for (std::size_t i = 0; i < a.weights[t].data.size(); ++i) {
            update(a.weights[t].data[i], b.weights[t].data[i]);
        }
        for (std::size_t i = 0; i < a.biases[t].size(); ++i) {
            update(a.biases[t][i], b.biases[t][i]);
        }
    }
    return worst;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::path(::testing::TempDir()) / name).string();
}

TEST(TrainConfigValidation, RejectsNonPositiveSettings) {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(cfg.check_valid(), std::invalid_argument);
    cfg.learning_rate = -1e-3;
    EXPECT_THROW(cfg.check_valid(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.epochs = 0;
    EXPECT_THROW(cfg.check_valid(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.check_valid(), std::invalid_argument);
    EXPECT_NO_THROW(TrainConfig{}.check_valid());
}

TEST(ModelShapes, AcceptsConsistentChainAndRejectsBreaks) {
    MlpModel good = toy_net();
    EXPECT_NO_THROW(good.check_shapes());

    MlpModel wrong_shape = toy_net();
    wrong_shape.weights[0] = Matrix(2, 1);
    EXPECT_THROW(wrong_shape.check_shapes(), std::invalid_argument);

    MlpModel wrong_bias = toy_net();
    wrong_bias.biases[1] = {0.5, 0.5};
    EXPECT_THROW(wrong_bias.check_shapes(), std::invalid_argument);

    MlpModel missing_transition = toy_net();
    missing_transition.weights.pop_back();
    EXPECT_THROW(missing_transition.check_shapes(), std::invalid_argument);

    MlpModel broken_value = toy_net();
    broken_value.weights[1](0, 0) = std::nan("");
    EXPECT_THROW(broken_value.check_shapes(), std::invalid_argument);

    MlpModel single_layer;
    single_layer.layer_sizes = {3};
    EXPECT_THROW(single_layer.check_shapes(), std::invalid_argument);
}

TEST(InitParams, ShapesBiasesAndScale) {
    const MlpModel m = init_params({3, 64, 64, 1}, 7);
    ASSERT_EQ(m.transition_count(), 3u);
    EXPECT_EQ(m.weights[0].rows, 64u);
    EXPECT_EQ(m.weights[0].cols, 3u);
    EXPECT_EQ(m.weights[1].rows, 64u);
    EXPECT_EQ(m.weights[1].cols, 64u);
    EXPECT_EQ(m.weights[2].rows, 1u);
    EXPECT_EQ(m.weights[2].cols, 64u);
    for (const auto& b : m.biases) {
        for (double v : b) EXPECT_EQ(v, 0.0);
    }
    // The 64x64 transition has 4096 draws: its sample mean and standard
    // deviation should sit close to 0 and sqrt(2 / 64).
    const auto& w = m.weights[1].data;
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    const double expected_std = std::sqrt(2.0 / 64.0);
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(std::sqrt(var), expected_std, 0.1 * expected_std);
}

TEST(InitParams, DeterministicPerSeed) {
    const MlpModel a = init_params({3, 8, 1}, 99);
    const MlpModel b = init_params({3, 8, 1}, 99);
    const MlpModel c = init_params({3, 8, 1}, 100);
    EXPECT_EQ(a.weights[0].data, b.weights[0].data);
    EXPECT_EQ(a.weights[1].data, b.weights[1].data);
    EXPECT_NE(a.weights[0].data, c.weights[0].data);
}

TEST(InitParams, RejectsDegenerateArchitectures) {
    EXPECT_THROW(init_params({3}, 0), std::invalid_argument);
    EXPECT_THROW(init_params({3, 0, 1}, 0), std::invalid_argument);
}

TEST(Forward, MatchesHandComputedToyNetwork) {
    const MlpModel m = toy_net();
    // x = 3: hidden = ReLU(3 - 1) = 2, output = 2 * 2 + 0.5 = 4.5.
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{3.0}), 4.5);
    // x = 0: hidden = ReLU(-1) = 0, output = 0.5.
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{0.0}), 0.5);
    // x = 1 lands exactly on the kink: ReLU(0) = 0.
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{1.0}), 0.5);
}

TEST(Forward, MatchesHandComputedTwoUnitNetwork) {
    MlpModel m;
    m.layer_sizes = {2, 2, 1};
    m.weights = {Matrix(2, 2), Matrix(1, 2)};
    m.weights[0](0, 0) = 1.0;
    m.weights[0](0, 1) = -1.0;
    m.weights[0](1, 0) = 0.5;
    m.weights[0](1, 1) = 0.5;
    m.weights[1](0, 0) = 1.0;
    m.weights[1](0, 1) = 2.0;
    m.biases = {{0.0, -1.0}, {-0.25}};
    // x = (1, 2): unit0 = ReLU(1 - 2) = 0, unit1 = ReLU(0.5 + 1 - 1) = 0.5,
    // output = 0 + 2 * 0.5 - 0.25 = 0.75.
    EXPECT_DOUBLE_EQ(forward(m, std::vector<double>{1.0, 2.0}), 0.75);
}

TEST(Forward, TraceRecordsEveryLayer) {
    const MlpModel m = toy_net();
    ForwardTrace trace;
    forward(m, std::vector<double>{3.0}, &trace);
    ASSERT_EQ(trace.layers.size(), 3u);
    EXPECT_EQ(trace.layers[0], std::vector<double>{3.0});
    EXPECT_EQ(trace.layers[1], std::vector<double>{2.0});
    EXPECT_EQ(trace.layers[2], std::vector<double>{4.5});
}

TEST(Forward, RejectsWrongInputLength) {
    const MlpModel m = toy_net();
    EXPECT_THROW(forward(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(MseLoss, HandValueAndErrors) {
    const std::vector<double> preds = {1.0, 2.0};
    const std::vector<double> targets = {0.0, 4.0};
    // ((1 - 0)^2 + (2 - 4)^2) / 2 = 2.5.
    EXPECT_DOUBLE_EQ(mse_loss(preds, targets), 2.5);
    EXPECT_THROW(mse_loss(preds, std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(mse_loss(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Backward, MatchesHandDerivedTinyNetGradients) {
    // Active hidden unit: pre-activation = 0.8 * 1 + 0.2 = 1 > 0.
    MlpModel m;
    m.layer_sizes = {1, 1, 1};
    m.weights = {Matrix(1, 1), Matrix(1, 1)};
    m.weights[0](0, 0) = 0.8;
    m.weights[1](0, 0) = 1.5;
    m.biases = {{0.2}, {-0.5}};

    // prediction = 1.5 * 1 - 0.5 = 1, residual = 1 - 2 = -1, so
    // dL/dpred = 2 * (-1) = -2 and the chain gives:
    //   dW2 = -2 * hidden = -2, db2 = -2,
    //   delta_hidden = -2 * 1.5 = -3 (gate open),
    //   dW1 = -3 * x = -3, db1 = -3.
    const Gradients g = backward(m, {{1.0}}, std::vector<double>{2.0});
    EXPECT_DOUBLE_EQ(g.weights[1](0, 0), -2.0);
    EXPECT_DOUBLE_EQ(g.biases[1][0], -2.0);
    EXPECT_DOUBLE_EQ(g.weights[0](0, 0), -3.0);
    EXPECT_DOUBLE_EQ(g.biases[0][0], -3.0);

    // The finite-difference path must agree on the same frozen numbers.
    const Gradients fd = finite_difference_gradients(m, {{1.0}}, std::vector<double>{2.0});
    EXPECT_NEAR(fd.weights[1](0, 0), -2.0, 1e-6);
    EXPECT_NEAR(fd.biases[1][0], -2.0, 1e-6);
    EXPECT_NEAR(fd.weights[0](0, 0), -3.0, 1e-6);
    EXPECT_NEAR(fd.biases[0][0], -3.0, 1e-6);
}

TEST(Backward, InactiveUnitBlocksUpstreamGradients) {
    MlpModel m;
    m.layer_sizes = {1, 1, 1};
    m.weights = {Matrix(1, 1), Matrix(1, 1)};
    m.weights[0](0, 0) = -0.8;  // pre-activation = -0.6 < 0, gate closed
    m.weights[1](0, 0) = 1.5;
    m.biases = {{0.2}, {-0.5}};

    const Gradients g = backward(m, {{1.0}}, std::vector<double>{2.0});
    // hidden = 0, prediction = -0.5, residual = -2.5, dL/dpred = -5.
    EXPECT_DOUBLE_EQ(g.biases[1][0], -5.0);
    EXPECT_DOUBLE_EQ(g.weights[1](0, 0), 0.0);  // scaled by hidden = 0
    EXPECT_DOUBLE_EQ(g.weights[0](0, 0), 0.0);  // blocked by the closed gate
    EXPECT_DOUBLE_EQ(g.biases[0][0], 0.0);
}

TEST(Backward, BatchGradientIsTheMeanOfSingleSampleGradients) {
    const MlpModel m = init_params({3, 6, 4, 1}, 31);
    const std::vector<std::vector<double>> xs = {{0.3, -1.2, 0.7}, {1.4, 0.2, -0.5}};
    const std::vector<double> ys = {0.9, -0.4};

    const Gradients batch = backward(m, xs, ys);
    const Gradients g0 = backward(m, {xs[0]}, std::vector<double>{ys[0]});
    const Gradients g1 = backward(m, {xs[1]}, std::vector<double>{ys[1]});

    for (std::size_t t = 0; t < batch.weights.size(); ++t) {
        for (std::size_t i = 0; i < batch.weights[t].data.size(); ++i) {
            EXPECT_NEAR(batch.weights[t].data[i],
                        0.5 * (g0.weights[t].data[i] + g1.weights[t].data[i]), 1e-12);
        }
        for (std::size_t i = 0; i < batch.biases[t].size(); ++i) {
            EXPECT_NEAR(batch.biases[t][i], 0.5 * (g0.biases[t][i] + g1.biases[t][i]), 1e-12);
        }
    }
}

TEST(Backward, AgreesWithFiniteDifferencesOnRandomNetworks) {
    Rng rng(424242);
    std::uniform_real_distribution<double> ux(-1.5, 1.5);
    std::uniform_real_distribution<double> uy(-2.0, 2.0);
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        const MlpModel m = init_params({3, 8, 5, 1}, 1000 + trial);
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        for (int i = 0; i < 6; ++i) {
            xs.push_back({ux(rng), ux(rng), ux(rng)});
            ys.push_back(uy(rng));
        }
        const Gradients analytic = backward(m, xs, ys);
        const Gradients numeric = finite_difference_gradients(m, xs, ys);
        EXPECT_LT(max_relative_gap(analytic, numeric), 1e-5) << "trial " << trial;
    }
}

TEST(Backward, RejectsMalformedBatches) {
    const MlpModel m = toy_net();
    EXPECT_THROW(backward(m, {}, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(backward(m, {{1.0}}, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(backward(m, {{1.0, 2.0}}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Train, LossDecreasesAndFitsNoiselessLinearData) {
    const Dataset d = linear_dataset(48, 5);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 3;
    const TrainResult res = train(d, cfg);
    ASSERT_EQ(res.report.loss_history.size(), 300u);
    EXPECT_EQ(res.report.final_epoch, 300u);
    const double first = res.report.loss_history.front();
    const double last = res.report.loss_history.back();
    EXPECT_LT(last, first / 10.0);
    EXPECT_LT(last, 0.05);  // z-scored units; the data is noiseless
    // In-sample predictions land close to the targets in raw units.
    const std::vector<double> preds = predict_all(res.model, d);
    double worst = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        worst = std::max(worst, std::abs(preds[i] - d.samples[i].target));
    }
    EXPECT_LT(worst, 0.75);  // target spread is about 7 raw units
}

TEST(Train, DeterministicPerSeedAndSensitiveToIt) {
    const Dataset d = linear_dataset(24, 8);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 77;
    const TrainResult a = train(d, cfg);
    const TrainResult b = train(d, cfg);
    EXPECT_EQ(a.report.loss_history, b.report.loss_history);
    for (std::size_t t = 0; t < a.model.transition_count(); ++t) {
        EXPECT_EQ(a.model.weights[t].data, b.model.weights[t].data);
        EXPECT_EQ(a.model.biases[t], b.model.biases[t]);
    }
    cfg.seed = 78;
    const TrainResult c = train(d, cfg);
    EXPECT_NE(a.model.weights[0].data, c.model.weights[0].data);
}

TEST(Train, ClampsOversizedBatches) {
    const Dataset d = linear_dataset(12, 21);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 1000;  // larger than the dataset: one batch per epoch
    const TrainResult res = train(d, cfg);
    EXPECT_EQ(res.report.loss_history.size(), 3u);
    for (double loss : res.report.loss_history) EXPECT_TRUE(std::isfinite(loss));
}

TEST(Train, TargetStandardizationCanBeDisabled) {
    const Dataset d = linear_dataset(16, 2);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.standardize_target = false;
    const TrainResult res = train(d, cfg);
    EXPECT_EQ(res.model.target_standardizer.means, std::vector<double>{0.0});
    EXPECT_EQ(res.model.target_standardizer.stds, std::vector<double>{1.0});
    // Features are still z-scored.
    EXPECT_EQ(res.model.feature_standardizer.column_count(), 3u);
}

TEST(Train, ReportsTheEpochWhenTheLossDiverges) {
    const Dataset d = linear_dataset(32, 4);
    TrainConfig cfg;
    cfg.optimizer = TrainConfig::Optimizer::sgd;
    cfg.learning_rate = 1e12;  // guaranteed blow-up
    cfg.epochs = 50;
    try {
        train(d, cfg);
        FAIL() << "expected the diverged-loss error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
    }
}

TEST(Train, RejectsInvalidConfigAndData) {
    const Dataset d = linear_dataset(8, 1);
    TrainConfig bad;
    bad.epochs = 0;
    EXPECT_THROW(train(d, bad), std::invalid_argument);
    EXPECT_THROW(train(Dataset{}, TrainConfig{}), std::invalid_argument);
}

TEST(Predict, AppliesStandardizersAroundTheForwardPass) {
    MlpModel m = toy_net();
    m.feature_standardizer = Standardizer{{10.0}, {2.0}};
    m.target_standardizer = Standardizer{{100.0}, {4.0}};
    // raw 16 -> z = (16 - 10) / 2 = 3 -> forward 4.5 -> raw 4.5 * 4 + 100.
    EXPECT_DOUBLE_EQ(predict(m, std::vector<double>{16.0}), 118.0);
    EXPECT_THROW(predict(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(Predict, PredictAllMatchesPerRowCalls) {
    const Dataset d = linear_dataset(10, 13);
    TrainConfig cfg;
    cfg.epochs = 3;
    const TrainResult res = train(d, cfg);
    const std::vector<double> all = predict_all(res.model, d);
    ASSERT_EQ(all.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(all[i], predict(res.model, d.samples[i].features));
    }
}

TEST(SaveLoad, RoundTripsParametersAndPredictionsBitwise) {
    const Dataset d = linear_dataset(20, 6);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 10;
    const TrainResult res = train(d, cfg);
    const std::string path = temp_path("model_roundtrip.txt");
    save_model(res.model, path);
    const MlpModel loaded = load_model(path);

    EXPECT_EQ(loaded.layer_sizes, res.model.layer_sizes);
    for (std::size_t t = 0; t < res.model.transition_count(); ++t) {
        EXPECT_EQ(loaded.weights[t].data, res.model.weights[t].data);
        EXPECT_EQ(loaded.biases[t], res.model.biases[t]);
    }
    EXPECT_EQ(loaded.feature_standardizer.means, res.model.feature_standardizer.means);
    EXPECT_EQ(loaded.feature_standardizer.stds, res.model.feature_standardizer.stds);
    EXPECT_EQ(loaded.target_standardizer.means, res.model.target_standardizer.means);
    EXPECT_EQ(loaded.target_standardizer.stds, res.model.target_standardizer.stds);

    Rng rng(55);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 25; ++i) {
        const std::vector<double> x = {u(rng), u(rng), u(rng)};
        EXPECT_EQ(predict(loaded, x), predict(res.model, x));
    }
}

TEST(SaveLoad, MissingFileIsAnIoError) {
    EXPECT_THROW(load_model(temp_path("no_such_model.txt")), IoError);
}

TEST(SaveLoad, RejectsCorruptFiles) {
    const std::string bad_magic = temp_path("bad_magic.txt");
    {
        std::ofstream out(bad_magic);
        out << "something_else 1\n";
    }
    EXPECT_THROW(load_model(bad_magic), std::runtime_error);

    const std::string bad_version = temp_path("bad_version.txt");
    {
        std::ofstream out(bad_version);
        out << "nanoreg_model 2\n";
    }
    EXPECT_THROW(load_model(bad_version), std::runtime_error);

    // A valid header followed by nothing: the numeric blocks are missing.
    const std::string truncated = temp_path("truncated.txt");
    {
        std::ofstream out(truncated);
        out << "nanoreg_model 1\nlayers 3 1 2 1\n";
    }
    EXPECT_THROW(load_model(truncated), std::runtime_error);
}

}  // namespace
}  // namespace nanoreg
