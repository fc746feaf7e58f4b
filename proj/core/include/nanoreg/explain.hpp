#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nanoreg/dataset.hpp"
#include "nanoreg/linalg.hpp"
#include "nanoreg/model.hpp"

namespace nanoreg {

/// Any scalar regressor over raw-unit feature vectors.
using BlackBox = std::function<double(std::span<const double>)>;

/// Local-surrogate explanation settings. kernel_width left empty defaults to
/// 0.75 * sqrt(feature count), the usual tabular convention.
struct LimeConfig {
    std::size_t n_perturb = 5000;
    double perturb_scale = 1.0;
    std::optional<double> kernel_width;
    double ridge_lambda = 1e-6;
    std::uint64_t seed = 0;

    void check_valid() const;
    double effective_kernel_width(std::size_t feature_count) const;
};

/// Weighted linear surrogate fitted around one instance. weights are in
/// standardized feature units: the predicted raw-target change per one
/// training-std move of that feature, so features with different physical
/// units are directly comparable. local_r2 is the weighted fit quality of
/// the surrogate (empty when the weighted response variance is zero).
struct Explanation {
    std::vector<double> instance;  // raw units; empty from fit_local_linear
    double intercept = 0.0;
    std::vector<double> weights;
    std::optional<double> local_r2;
};

/// cfg.n_perturb raw-unit vectors around the instance: the first row is the
/// instance itself, the rest add Gaussian noise with per-feature std =
/// perturb_scale * feature_std. Deterministic per cfg.seed.
std::vector<std::vector<double>> perturb(std::span<const double> instance,
                                         std::span<const double> feature_stds, const LimeConfig& cfg);

/// Proximity weight exp(-d^2 / width^2) per perturbation, with d the
/// Euclidean distance from the instance after dividing each coordinate
/// difference by its feature std. The instance row gets weight 1.
std::vector<double> kernel_weights(const std::vector<std::vector<double>>& perturbations,
                                   std::span<const double> instance,
                                   std::span<const double> feature_stds, double kernel_width);

/// Weighted ridge least squares via the normal equations; the intercept is
/// not penalized. rows are design vectors in whatever units the caller
/// chose; the returned weights are in those units and instance is left
/// empty. Requires at least (features + 1) rows and a positive total sample
/// weight; throws std::runtime_error when the system is singular even with
/// the given ridge_lambda.
Explanation fit_local_linear(const std::vector<std::vector<double>>& rows,
                             std::span<const double> responses, std::span<const double> sample_weights,
                             double ridge_lambda);

/// Full local explanation: perturb -> query the black box -> proximity
/// weights -> weighted ridge fit on standardized offsets (x - instance) /
/// feature_std. training_stats carries the per-feature training stds (means
/// are unused); its column count must equal the instance length.
Explanation explain(const BlackBox& fn, std::span<const double> instance,
                    const Standardizer& training_stats, const LimeConfig& cfg);

/// Convenience overload: explains a trained network with its own stored
/// feature statistics.
Explanation explain(const MlpModel& model, std::span<const double> instance, const LimeConfig& cfg);

/// One explanation per dataset row; row r of the result holds that sample's
/// feature weights. Each row draws its own sub-seed from cfg.seed, so the
/// matrix is deterministic and rows are independent.
Matrix weight_matrix(const BlackBox& fn, const Dataset& data, const Standardizer& training_stats,
                     const LimeConfig& cfg);
Matrix weight_matrix(const MlpModel& model, const Dataset& data, const LimeConfig& cfg);

/// CSV export: sample_id, one signed-weight column per feature, then one
/// absolute-weight column per feature, at 10 significant digits.
void write_weight_matrix_csv(const Matrix& weights, const Dataset& data, const std::string& path);

}  // namespace nanoreg
