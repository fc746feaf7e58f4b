#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nanoreg {

enum class Origin { original, synthetic };

/// One observation: a feature vector plus a single continuous target.
struct Sample {
    std::vector<double> features;
    double target = 0.0;
    Origin origin = Origin::original;
};

/// Ordered collection of samples with named columns. All samples share one
/// feature length; names are non-empty and unique.
struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> feature_names;
    std::string target_name;

    std::size_t size() const { return samples.size(); }
    std::size_t feature_count() const { return feature_names.size(); }

    /// Throws std::invalid_argument when a structural invariant is violated
    /// (empty dataset, ragged feature lengths, non-finite values, bad names).
    void check_valid() const;
};

/// Per-column z-scoring statistics fit on training data.
/// Population standard deviation; columns with std below 1e-12 get std = 1
/// so constant columns transform to exactly 0.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stds;

    std::size_t column_count() const { return means.size(); }

    std::vector<double> transform_row(const std::vector<double>& values) const;
    std::vector<double> inverse_transform_row(const std::vector<double>& values) const;
};

/// Fits per-column mean/std over the dataset's features, plus the target as a
/// trailing column when include_target is set.
Standardizer fit_standardizer(const Dataset& data, bool include_target = false);

/// Applies z = (v - mean) / std elementwise. A standardizer over F columns
/// maps features only; one over F+1 columns also maps the target.
Dataset transform(const Standardizer& std_, const Dataset& data);
Dataset inverse_transform(const Standardizer& std_, const Dataset& data);

/// Fold assignment for k-fold cross-validation: a seeded random permutation
/// followed by round-robin assignment, so fold sizes differ by at most one.
struct FoldPlan {
    std::vector<std::size_t> assignments;  // assignments[i] in [0, k)
    std::size_t k = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
};

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// New dataset holding the given rows in the given order. Indices must be in
/// range; repeats are allowed.
Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

/// Indices of the rows dedup would keep: first occurrence of each sample,
/// order preserved. Two rows are duplicates when every feature and the target
/// agree within absolute tolerance tol (tol = 0 means exact equality).
std::vector<std::size_t> dedup_indices(const Dataset& data, double tol = 0.0);
Dataset dedup(const Dataset& data, double tol = 0.0);

// --- Synthetic benchmark -----------------------------------------------
//
// Stand-in for a private 28-sample nanorod dataset. Features are drawn
// uniformly from the experimentally reported ranges and the three targets
// come from a fixed smooth ground-truth surface (see benchmark_* below),
// so regression quality can be judged against a known function.

inline constexpr const char* kCoreEdgeColumn = "core_edge_nm";
inline constexpr const char* kCoreAmountColumn = "core_amount_nmol";
inline constexpr const char* kSAmountColumn = "s_amount_mg";
inline constexpr const char* kLengthColumn = "length_nm";
inline constexpr const char* kWidthColumn = "width_nm";
inline constexpr const char* kAspectRatioColumn = "aspect_ratio";

inline constexpr double kCoreEdgeMin = 489.0, kCoreEdgeMax = 570.0;
inline constexpr double kCoreAmountMin = 10.0, kCoreAmountMax = 60.0;
inline constexpr double kSAmountMin = 25.0, kSAmountMax = 100.0;

struct BenchmarkRow {
    double core_edge_nm = 0.0;
    double core_amount_nmol = 0.0;
    double s_amount_mg = 0.0;
    double length_nm = 0.0;
    double width_nm = 0.0;
    double aspect_ratio = 0.0;
};

/// Ground-truth surfaces on the feature box. With u, v, w the features
/// rescaled to [0,1] (core edge, core amount, S amount):
///   aspect = 6.1 + 0.5*(1-v) + 23.9*(1-v)^1.6 * (0.76 + 0.14*u + 0.10*w)
///   width  = 3.2 + 1.8*w + 0.5*u
///   length = width * aspect
/// Aspect ratio spans exactly [6.1, 30.5] over the box and length is
/// strictly decreasing in core amount.
double benchmark_aspect_ratio(double core_edge_nm, double core_amount_nmol, double s_amount_mg);
double benchmark_width(double core_edge_nm, double core_amount_nmol, double s_amount_mg);
double benchmark_length(double core_edge_nm, double core_amount_nmol, double s_amount_mg);

std::vector<BenchmarkRow> synth_benchmark_rows(std::size_t n, std::uint64_t seed);

enum class TargetKind { length, width, aspect_ratio };

const char* target_column_name(TargetKind kind);

Dataset synth_benchmark(std::size_t n, std::uint64_t seed, TargetKind target = TargetKind::length);

}  // namespace nanoreg
