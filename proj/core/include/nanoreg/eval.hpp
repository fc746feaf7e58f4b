#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nanoreg/dataset.hpp"
#include "nanoreg/model.hpp"

namespace nanoreg {

/// Regression quality summary. r2 is empty when the coefficient of
/// determination is undefined (fewer than two pairs, or zero target
/// variance); the other two fields are always set.
struct Metrics {
    double mae = 0.0;
    double mse = 0.0;
    std::optional<double> r2;
};

/// MAE = mean |prediction - target|, MSE = mean squared error,
/// R^2 = 1 - sum of squared errors / total sum of squares around the target
/// mean. Throws std::invalid_argument on empty input or length mismatch, and
/// std::logic_error if the computed values violate mae^2 <= mse (which holds
/// for every real sample by the power-mean inequality, so a violation means
/// the computation itself is broken).
Metrics compute_metrics(std::span<const double> predictions, std::span<const double> targets);

/// How the original-rows metric in a CvReport is produced:
///   out_of_fold — pool each original row's prediction from the one fold
///                 that held it out, then score the pooled vector;
///   in_training — train a single model on the full dataset and score the
///                 original rows with it (optimistic; for comparison only).
enum class OriginalEval { out_of_fold, in_training };

/// k-fold cross-validation results. mean/std_dev aggregate the per-fold
/// metrics fieldwise; std_dev uses the population convention (divide by k).
/// The aggregated r2 is set only when every fold's r2 is defined.
/// original_subset scores only the rows tagged Origin::original, per
/// original_mode.
struct CvReport {
    std::vector<Metrics> per_fold;
    Metrics mean;
    Metrics std_dev;
    Metrics original_subset;
    OriginalEval original_mode = OriginalEval::out_of_fold;
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

/// Trains one model per fold on the other k-1 folds, scores the held-out
/// fold, and aggregates. The fold split and each fold's training run draw
/// deterministic sub-seeds from `seed`; cfg.seed is ignored in favor of
/// those. Requires 2 <= k <= |data| and at least one Origin::original row.
CvReport cross_validate(const Dataset& data, std::size_t k, const TrainConfig& cfg, std::uint64_t seed,
                        OriginalEval original_mode = OriginalEval::out_of_fold);

/// Scores a trained model on a held-out dataset in raw target units.
/// The caller is responsible for keeping `data` disjoint from the rows the
/// model was trained on; nothing here can verify that.
Metrics evaluate_holdout(const MlpModel& model, const Dataset& data);

/// JSON document with per_fold, mean, std, and original_subset blocks.
/// Undefined r2 serializes as null. Byte-deterministic for equal reports.
std::string cv_report_to_json(const CvReport& report);

/// CSV with one row per metric: metric, mean, std, original. Cells carry 17
/// significant digits; undefined r2 leaves the cell empty.
std::string cv_report_to_csv(const CvReport& report);

}  // namespace nanoreg
