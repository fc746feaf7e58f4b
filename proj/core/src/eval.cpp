#include "nanoreg/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nanoreg/csv.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {

namespace {

constexpr std::uint64_t kSplitStream = 201;
constexpr std::uint64_t kFullTrainStream = 202;
constexpr std::uint64_t kFoldTrainStreamBase = 210;

}  // namespace

Metrics compute_metrics(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw std::invalid_argument("metrics: " + std::to_string(predictions.size()) + " predictions vs " +
                                    std::to_string(targets.size()) + " targets");
    }
    if (predictions.empty()) throw std::invalid_argument("metrics: empty input");

    const double n = static_cast<double>(predictions.size());
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double target_sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - targets[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        target_sum += targets[i];
    }

    Metrics m;
    m.mae = abs_sum / n;
    m.mse = sq_sum / n;
    if (predictions.size() >= 2) {
        const double target_mean = target_sum / n;
        double ss_tot = 0.0;
        for (const double y : targets) {
            const double d = y - target_mean;
            ss_tot += d * d;
        }
        if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
    }

    // mae^2 <= mse always holds in exact arithmetic; allow only rounding slack.
    if (m.mae * m.mae > m.mse * (1.0 + 1e-12) + 1e-300) {
        throw std::logic_error("metrics: mae^2 > mse, computation is inconsistent");
    }
    return m;
}

namespace {

// Fieldwise mean and population std over per-fold metrics. Aggregated r2 is
// defined only when every fold defines it.
void aggregate_folds(CvReport& report) {
    const double k = static_cast<double>(report.per_fold.size());
    double mae_sum = 0.0, mse_sum = 0.0, r2_sum = 0.0;
    bool all_r2 = true;
    for (const Metrics& m : report.per_fold) {
        mae_sum += m.mae;
        mse_sum += m.mse;
        if (m.r2)
            r2_sum += *m.r2;
        else
            all_r2 = false;
    }
    report.mean.mae = mae_sum / k;
    report.mean.mse = mse_sum / k;
    if (all_r2) report.mean.r2 = r2_sum / k;

    double mae_var = 0.0, mse_var = 0.0, r2_var = 0.0;
    for (const Metrics& m : report.per_fold) {
        const double da = m.mae - report.mean.mae;
        const double ds = m.mse - report.mean.mse;
        mae_var += da * da;
        mse_var += ds * ds;
        if (all_r2) {
            const double dr = *m.r2 - *report.mean.r2;
            r2_var += dr * dr;
        }
    }
    report.std_dev.mae = std::sqrt(mae_var / k);
    report.std_dev.mse = std::sqrt(mse_var / k);
    if (all_r2) report.std_dev.r2 = std::sqrt(r2_var / k);
}

}  // namespace

CvReport cross_validate(const Dataset& data, std::size_t k, const TrainConfig& cfg, std::uint64_t seed,
                        OriginalEval original_mode) {
    data.check_valid();
    cfg.check_valid();
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
    if (k > data.size()) {
        throw std::invalid_argument("cross_validate: k = " + std::to_string(k) + " exceeds " +
                                    std::to_string(data.size()) + " rows");
    }
    bool any_original = false;
    for (const Sample& s : data.samples) {
        if (s.origin == Origin::original) {
            any_original = true;
            break;
        }
    }
    if (!any_original) throw std::invalid_argument("cross_validate: no original rows to score");

    const FoldPlan plan = kfold_split(data.size(), k, mix_seed(seed, kSplitStream));

    CvReport report;
    report.k = k;
    report.seed = seed;
    report.original_mode = original_mode;

    std::vector<double> pooled_pred, pooled_actual;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const std::vector<std::size_t> test_idx = plan.test_indices(fold);
        const std::vector<std::size_t> train_idx = plan.train_indices(fold);

        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = mix_seed(seed, kFoldTrainStreamBase + fold);
        const TrainResult fold_run = train(subset(data, train_idx), fold_cfg);

        std::vector<double> preds, actuals;
        preds.reserve(test_idx.size());
        actuals.reserve(test_idx.size());
        for (std::size_t i : test_idx) {
            const Sample& s = data.samples[i];
            const double p = predict(fold_run.model, s.features);
            preds.push_back(p);
            actuals.push_back(s.target);
            if (original_mode == OriginalEval::out_of_fold && s.origin == Origin::original) {
                pooled_pred.push_back(p);
                pooled_actual.push_back(s.target);
            }
        }
        report.per_fold.push_back(compute_metrics(preds, actuals));
    }
    aggregate_folds(report);

    if (original_mode == OriginalEval::in_training) {
        TrainConfig full_cfg = cfg;
        full_cfg.seed = mix_seed(seed, kFullTrainStream);
        const TrainResult full_run = train(data, full_cfg);
        for (const Sample& s : data.samples) {
            if (s.origin != Origin::original) continue;
            pooled_pred.push_back(predict(full_run.model, s.features));
            pooled_actual.push_back(s.target);
        }
    }
    report.original_subset = compute_metrics(pooled_pred, pooled_actual);
    return report;
}

Metrics evaluate_holdout(const MlpModel& model, const Dataset& data) {
    data.check_valid();
    if (data.feature_count() != model.input_size()) {
        throw std::invalid_argument("evaluate_holdout: dataset has " + std::to_string(data.feature_count()) +
                                    " features, model expects " + std::to_string(model.input_size()));
    }
    const std::vector<double> preds = predict_all(model, data);
    std::vector<double> actuals;
    actuals.reserve(data.size());
    for (const Sample& s : data.samples) actuals.push_back(s.target);
    return compute_metrics(preds, actuals);
}

namespace {

nlohmann::ordered_json metrics_to_json_obj(const Metrics& m) {
    nlohmann::ordered_json j;
    j["mae"] = m.mae;
    j["mse"] = m.mse;
    if (m.r2)
        j["r2"] = *m.r2;
    else
        j["r2"] = nullptr;
    return j;
}

}  // namespace

std::string cv_report_to_json(const CvReport& report) {
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["seed"] = report.seed;
    j["original_mode"] =
        report.original_mode == OriginalEval::out_of_fold ? "out_of_fold" : "in_training";
    j["per_fold"] = nlohmann::ordered_json::array();
    for (const Metrics& m : report.per_fold) j["per_fold"].push_back(metrics_to_json_obj(m));
    j["mean"] = metrics_to_json_obj(report.mean);
    j["std"] = metrics_to_json_obj(report.std_dev);
    j["original_subset"] = metrics_to_json_obj(report.original_subset);
    return j.dump(2) + "\n";
}

std::string cv_report_to_csv(const CvReport& report) {
    std::ostringstream out;
    out << "metric,mean,std,original\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    out << "mae," << format_double(report.mean.mae) << ',' << format_double(report.std_dev.mae) << ','
        << format_double(report.original_subset.mae) << '\n';
    out << "mse," << format_double(report.mean.mse) << ',' << format_double(report.std_dev.mse) << ','
        << format_double(report.original_subset.mse) << '\n';
    out << "r2," << cell(report.mean.r2) << ',' << cell(report.std_dev.r2) << ','
        << cell(report.original_subset.r2) << '\n';
    return out.str();
}

}  // namespace nanoreg
