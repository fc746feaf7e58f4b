#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nanoreg/dataset.hpp"
#include "nanoreg/linalg.hpp"

namespace nanoreg {

struct TrainConfig {
    enum class Optimizer { sgd, adam };

    double learning_rate = 1e-3;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;  // clamped to the training-set size
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 0;
    /// The target is z-scored together with the features by default;
    /// predictions are mapped back to original units.
    bool standardize_target = true;

    void check_valid() const;
};

/// Fully connected ReLU network with a linear output unit, plus the
/// standardizers fitted on its training data. weights[t] has shape
/// layer_sizes[t+1] x layer_sizes[t].
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Standardizer feature_standardizer;
    Standardizer target_standardizer;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t transition_count() const { return layer_sizes.size() - 1; }
    void check_shapes() const;  // throws std::invalid_argument on a broken chain
};

inline constexpr std::size_t kHiddenWidth = 64;

/// He-scaled Gaussian weights (std = sqrt(2 / fan_in)), zero biases.
MlpModel init_params(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

/// Post-activation vectors per layer; layers[0] is the input, layers.back()
/// the (single) linear output.
struct ForwardTrace {
    std::vector<std::vector<double>> layers;
};

/// Forward pass in z-scored space. Hidden layers apply ReLU, the output
/// layer is affine with no activation.
double forward(const MlpModel& model, std::span<const double> x, ForwardTrace* trace = nullptr);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

/// Exact analytic gradient of the batch-mean MSE with respect to every
/// parameter. The ReLU subgradient at exactly 0 is taken as 0. Inputs are
/// expected in z-scored space.
Gradients backward(const MlpModel& model, const std::vector<std::vector<double>>& inputs,
                   std::span<const double> targets);

/// Central-difference gradient of the same batch loss; goes only through the
/// forward pass, so it is an independent check on backward().
Gradients finite_difference_gradients(const MlpModel& model,
                                      const std::vector<std::vector<double>>& inputs,
                                      std::span<const double> targets, double eps = 1e-6);

struct TrainReport {
    std::vector<double> loss_history;  // per-epoch mean training MSE, z-scored units
    std::size_t final_epoch = 0;
};

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

/// Fits standardizers, z-scores features and target, and runs minibatch
/// gradient descent with a per-epoch seeded shuffle. Architecture is
/// [F, 64, 64, 1]. Deterministic per (data, cfg); throws std::runtime_error
/// naming the epoch if the loss turns non-finite.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

/// Raw-unit prediction: z-scores the input, runs forward, maps the output
/// back through the target standardizer.
double predict(const MlpModel& model, std::span<const double> raw_features);
std::vector<double> predict_all(const MlpModel& model, const Dataset& data);

/// Self-describing text format, 17 significant digits; load(save(m))
/// reproduces predictions bitwise.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace nanoreg
