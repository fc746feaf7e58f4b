#include "nanoreg/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {
namespace {

Dataset linear_dataset(std::size_t n, std::uint64_t seed, Origin origin = Origin::original) {
    Dataset d;
    d.feature_names = {"f0", "f1", "f2"};
    d.target_name = "y";
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = {u(rng), u(rng), u(rng)};
        const double y = 2.0 * x[0] - x[1] + 0.5 * x[2] + 3.0;
        d.samples.push_back({std::move(x), y, origin});
    }
    return d;
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.epochs = 2;
    return cfg;
}

TEST(ComputeMetrics, HandComputedTriple) {
    const std::vector<double> targets = {1.0, 2.0, 3.0};
    const std::vector<double> preds = {2.0, 2.0, 2.0};
    const Metrics m = compute_metrics(preds, targets);
    // |errors| = 1, 0, 1 -> MAE = MSE = 2/3; predictions equal the target
    // mean, so the model explains none of the variance and R^2 = 0.
    EXPECT_NEAR(m.mae, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(m.mse, 2.0 / 3.0, 1e-12);
    ASSERT_TRUE(m.r2.has_value());
    EXPECT_NEAR(*m.r2, 0.0, 1e-12);
}

TEST(ComputeMetrics, PerfectPredictionsScoreOne) {
    const std::vector<double> targets = {1.5, -2.0, 0.25, 7.0};
    const Metrics m = compute_metrics(targets, targets);
    EXPECT_EQ(m.mae, 0.0);
    EXPECT_EQ(m.mse, 0.0);
    ASSERT_TRUE(m.r2.has_value());
    EXPECT_DOUBLE_EQ(*m.r2, 1.0);
}

TEST(ComputeMetrics, WorseThanTheMeanGoesNegative) {
    const std::vector<double> targets = {0.0, 1.0};
    const std::vector<double> preds = {2.0, -1.0};
    const Metrics m = compute_metrics(preds, targets);
    ASSERT_TRUE(m.r2.has_value());
    // ss_res = 4 + 4 = 8, ss_tot = 0.5 -> R^2 = 1 - 16 = -15.
    EXPECT_NEAR(*m.r2, -15.0, 1e-12);
}

TEST(ComputeMetrics, R2UndefinedForConstantTargetsOrSinglePair) {
    const Metrics constant =
        compute_metrics(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{5.0, 5.0, 5.0});
    EXPECT_FALSE(constant.r2.has_value());
    EXPECT_NEAR(constant.mae, 3.0, 1e-12);  // |errors| = 4, 3, 2

    const Metrics single = compute_metrics(std::vector<double>{4.0}, std::vector<double>{1.0});
    EXPECT_FALSE(single.r2.has_value());
    EXPECT_NEAR(single.mae, 3.0, 1e-12);
    EXPECT_NEAR(single.mse, 9.0, 1e-12);
}

TEST(ComputeMetrics, RejectsEmptyAndMismatchedInputs) {
    EXPECT_THROW(compute_metrics(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                 std::invalid_argument);
}

TEST(ComputeMetrics, TranslationAndScalingLaws) {
    Rng rng(91);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> targets(40), preds(40);
    for (std::size_t i = 0; i < 40; ++i) {
        targets[i] = u(rng);
        preds[i] = targets[i] + 0.3 * u(rng);
    }
    const Metrics base = compute_metrics(preds, targets);
    ASSERT_TRUE(base.r2.has_value());

    // Shifting both vectors by a constant changes nothing.
    std::vector<double> t_shift = targets, p_shift = preds;
    for (auto& v : t_shift) v += 17.5;
    for (auto& v : p_shift) v += 17.5;
    const Metrics shifted = compute_metrics(p_shift, t_shift);
    EXPECT_NEAR(shifted.mae, base.mae, 1e-9);
    EXPECT_NEAR(shifted.mse, base.mse, 1e-9);
    EXPECT_NEAR(*shifted.r2, *base.r2, 1e-9);

    // Scaling both by s multiplies MAE by |s| and MSE by s^2; R^2 is
    // invariant under any affine map applied to both vectors.
    const double s = -2.5;
    std::vector<double> t_scale = targets, p_scale = preds;
    for (auto& v : t_scale) v = s * v + 1.0;
    for (auto& v : p_scale) v = s * v + 1.0;
    const Metrics scaled = compute_metrics(p_scale, t_scale);
    EXPECT_NEAR(scaled.mae, std::abs(s) * base.mae, 1e-9);
    EXPECT_NEAR(scaled.mse, s * s * base.mse, 1e-9);
    EXPECT_NEAR(*scaled.r2, *base.r2, 1e-9);
}

TEST(ComputeMetrics, PowerMeanInequalityHoldsOnRandomData) {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> targets(13), preds(13);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            targets[i] = u(rng);
            preds[i] = u(rng);
        }
        const Metrics m = compute_metrics(preds, targets);  // must not throw
        EXPECT_LE(m.mae * m.mae, m.mse * (1.0 + 1e-12));
    }
}

TEST(CrossValidate, AggregatesMatchAnIndependentRecomputation) {
    const Dataset d = linear_dataset(18, 40);
    const CvReport report = cross_validate(d, 3, quick_config(), 7);
    ASSERT_EQ(report.per_fold.size(), 3u);
    EXPECT_EQ(report.k, 3u);
    EXPECT_EQ(report.seed, 7u);

    auto check_field = [&](auto getter) {
        double mean = 0.0;
        for (const Metrics& m : report.per_fold) mean += getter(m);
        mean /= 3.0;
        double var = 0.0;
        for (const Metrics& m : report.per_fold) var += (getter(m) - mean) * (getter(m) - mean);
        var /= 3.0;  // population convention
        EXPECT_NEAR(getter(report.mean), mean, 1e-12);
        EXPECT_NEAR(getter(report.std_dev), std::sqrt(var), 1e-12);
    };
    check_field([](const Metrics& m) { return m.mae; });
    check_field([](const Metrics& m) { return m.mse; });
    bool all_r2 = true;
    for (const Metrics& m : report.per_fold) all_r2 = all_r2 && m.r2.has_value();
    if (all_r2) {
        check_field([](const Metrics& m) { return *m.r2; });
    } else {
        EXPECT_FALSE(report.mean.r2.has_value());
        EXPECT_FALSE(report.std_dev.r2.has_value());
    }
}

TEST(CrossValidate, ConstantTargetsLeaveR2UndefinedEverywhere) {
    Dataset d;
    d.feature_names = {"x"};
    d.target_name = "y";
    for (int i = 0; i < 4; ++i) {
        d.samples.push_back({{static_cast<double>(i)}, 5.0, Origin::original});
    }
    const CvReport report = cross_validate(d, 2, quick_config(), 3);
    for (const Metrics& m : report.per_fold) {
        EXPECT_FALSE(m.r2.has_value());
        EXPECT_GE(m.mae, 0.0);
        EXPECT_TRUE(std::isfinite(m.mse));
    }
    EXPECT_FALSE(report.mean.r2.has_value());
    EXPECT_FALSE(report.std_dev.r2.has_value());
    EXPECT_FALSE(report.original_subset.r2.has_value());
}

TEST(CrossValidate, PoolingBeatsAveragingWhenFoldsAreSingletons) {
    // Leave-one-out: every fold holds a single row, so per-fold R^2 is
    // undefined, but the pooled original-subset vector spans all rows and
    // gets a defined R^2 — pooling and averaging are genuinely different.
    const Dataset d = linear_dataset(6, 11);
    const CvReport report = cross_validate(d, 6, quick_config(), 5);
    for (const Metrics& m : report.per_fold) {
        EXPECT_FALSE(m.r2.has_value());
        EXPECT_NEAR(m.mae * m.mae, m.mse, 1e-9 * std::max(1.0, m.mse));
    }
    EXPECT_FALSE(report.mean.r2.has_value());
    EXPECT_TRUE(report.original_subset.r2.has_value());
}

TEST(CrossValidate, OriginalSubsetScoresOnlyTheOriginQualifiedRows) {
    // One original row among many synthetics: the pooled original vector has
    // length 1, so its R^2 is undefined and MAE^2 equals MSE exactly.
    Dataset d = linear_dataset(11, 23, Origin::synthetic);
    d.samples[4].origin = Origin::original;
    const CvReport report = cross_validate(d, 3, quick_config(), 9);
    EXPECT_FALSE(report.original_subset.r2.has_value());
    EXPECT_NEAR(report.original_subset.mae * report.original_subset.mae, report.original_subset.mse,
                1e-9 * std::max(1.0, report.original_subset.mse));
    // The fold metrics cover every row, synthetic ones included, so at least
    // one fold sees more than one sample and r2 there is defined.
    bool any_fold_r2 = false;
    for (const Metrics& m : report.per_fold) any_fold_r2 = any_fold_r2 || m.r2.has_value();
    EXPECT_TRUE(any_fold_r2);
}

TEST(CrossValidate, DeterministicPerSeedAndSensitiveToIt) {
    const Dataset d = linear_dataset(12, 3);
    const CvReport a = cross_validate(d, 3, quick_config(), 21);
    const CvReport b = cross_validate(d, 3, quick_config(), 21);
    EXPECT_EQ(cv_report_to_json(a), cv_report_to_json(b));
    const CvReport c = cross_validate(d, 3, quick_config(), 22);
    EXPECT_NE(cv_report_to_json(a), cv_report_to_json(c));
}

TEST(CrossValidate, IgnoresTheSeedInsideTrainConfig) {
    const Dataset d = linear_dataset(12, 3);
    TrainConfig cfg_a = quick_config();
    cfg_a.seed = 1;
    TrainConfig cfg_b = quick_config();
    cfg_b.seed = 999;
    EXPECT_EQ(cv_report_to_json(cross_validate(d, 3, cfg_a, 21)),
              cv_report_to_json(cross_validate(d, 3, cfg_b, 21)));
}

TEST(CrossValidate, InTrainingModeIsRecordedInTheReport) {
    const Dataset d = linear_dataset(10, 31);
    const CvReport report =
        cross_validate(d, 2, quick_config(), 13, OriginalEval::in_training);
    EXPECT_EQ(report.original_mode, OriginalEval::in_training);
    EXPECT_TRUE(std::isfinite(report.original_subset.mae));
    // The two modes genuinely produce different original-subset numbers.
    const CvReport oof = cross_validate(d, 2, quick_config(), 13, OriginalEval::out_of_fold);
    EXPECT_NE(report.original_subset.mse, oof.original_subset.mse);
}

TEST(CrossValidate, RejectsBadFoldCountsAndMissingOriginals) {
    const Dataset d = linear_dataset(8, 2);
    EXPECT_THROW(cross_validate(d, 1, quick_config(), 0), std::invalid_argument);
    EXPECT_THROW(cross_validate(d, 9, quick_config(), 0), std::invalid_argument);
    const Dataset all_synth = linear_dataset(8, 2, Origin::synthetic);
    EXPECT_THROW(cross_validate(all_synth, 2, quick_config(), 0), std::invalid_argument);
}

TEST(EvaluateHoldout, ScoresAHandBuiltExactModel) {
    // 1 -> 1 -> 1 network computing 2 * ReLU(x - 1) + 0.5 with identity
    // standardizers; targets are set to the exact network outputs.
    MlpModel m;
    m.layer_sizes = {1, 1, 1};
    m.weights = {Matrix(1, 1), Matrix(1, 1)};
    m.weights[0](0, 0) = 1.0;
    m.weights[1](0, 0) = 2.0;
    m.biases = {{-1.0}, {0.5}};
    m.feature_standardizer = Standardizer{{0.0}, {1.0}};
    m.target_standardizer = Standardizer{{0.0}, {1.0}};

    Dataset d;
    d.feature_names = {"x"};
    d.target_name = "y";
    d.samples.push_back({{3.0}, 4.5, Origin::original});
    d.samples.push_back({{5.0}, 8.5, Origin::original});
    d.samples.push_back({{0.0}, 0.5, Origin::original});

    const Metrics metrics = evaluate_holdout(m, d);
    EXPECT_EQ(metrics.mae, 0.0);
    EXPECT_EQ(metrics.mse, 0.0);
    ASSERT_TRUE(metrics.r2.has_value());
    EXPECT_DOUBLE_EQ(*metrics.r2, 1.0);
}

TEST(EvaluateHoldout, RejectsDimensionMismatchAndEmptyData) {
    const Dataset d3 = linear_dataset(6, 1);
    TrainConfig cfg = quick_config();
    const TrainResult res = train(d3, cfg);

    Dataset d2;
    d2.feature_names = {"a", "b"};
    d2.target_name = "y";
    d2.samples.push_back({{1.0, 2.0}, 3.0, Origin::original});
    EXPECT_THROW(evaluate_holdout(res.model, d2), std::invalid_argument);
    EXPECT_THROW(evaluate_holdout(res.model, Dataset{}), std::invalid_argument);
}

TEST(CvReportJson, ParsesBackWithTheDocumentedStructure) {
    const Dataset d = linear_dataset(12, 19);
    const CvReport report = cross_validate(d, 3, quick_config(), 77);
    const std::string text = cv_report_to_json(report);
    const nlohmann::json j = nlohmann::json::parse(text);

    EXPECT_EQ(j.at("k").get<std::size_t>(), 3u);
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 77u);
    EXPECT_EQ(j.at("original_mode").get<std::string>(), "out_of_fold");
    ASSERT_TRUE(j.at("per_fold").is_array());
    EXPECT_EQ(j.at("per_fold").size(), 3u);
    for (const auto& fold : j.at("per_fold")) {
        EXPECT_TRUE(fold.contains("mae"));
        EXPECT_TRUE(fold.contains("mse"));
        EXPECT_TRUE(fold.contains("r2"));
    }
    for (const char* key : {"mean", "std", "original_subset"}) {
        EXPECT_TRUE(j.at(key).is_object()) << key;
    }
    EXPECT_NEAR(j.at("mean").at("mae").get<double>(), report.mean.mae, 0.0);
}

TEST(CvReportJson, UndefinedR2SerializesAsNull) {
    CvReport report;
    report.k = 2;
    report.seed = 0;
    report.per_fold = {Metrics{1.0, 2.0, std::nullopt}, Metrics{2.0, 5.0, std::nullopt}};
    report.mean = Metrics{1.5, 3.5, std::nullopt};
    report.std_dev = Metrics{0.5, 1.5, std::nullopt};
    report.original_subset = Metrics{1.0, 1.0, std::nullopt};
    const nlohmann::json j = nlohmann::json::parse(cv_report_to_json(report));
    EXPECT_TRUE(j.at("mean").at("r2").is_null());
    EXPECT_TRUE(j.at("per_fold").at(0).at("r2").is_null());
}

TEST(CvReportCsv, HasOneRowPerMetricAndEmptyCellsForUndefinedR2) {
    CvReport report;
    report.k = 2;
    report.per_fold = {Metrics{1.0, 2.0, 0.5}, Metrics{2.0, 5.0, 0.7}};
    report.mean = Metrics{1.5, 3.5, 0.6};
    report.std_dev = Metrics{0.5, 1.5, 0.1};
    report.original_subset = Metrics{1.0, 1.0, std::nullopt};
    const std::string text = cv_report_to_csv(report);

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        lines.push_back(text.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "metric,mean,std,original");
    EXPECT_EQ(lines[1].substr(0, 4), "mae,");
    EXPECT_EQ(lines[2].substr(0, 4), "mse,");
    EXPECT_EQ(lines[3].substr(0, 3), "r2,");
    // original r2 is undefined -> the final cell of the r2 row is empty.
    EXPECT_EQ(lines[3].back(), ',');
}

}  // namespace
}  // namespace nanoreg
