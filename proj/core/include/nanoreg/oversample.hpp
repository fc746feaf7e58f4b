#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nanoreg/dataset.hpp"

namespace nanoreg {

/// Oversampling configuration. k neighbors are drawn from the minority
/// class itself, so k <= T - 1 is required rather than silently clamped.
struct SmoteConfig {
    std::size_t t = 2;          // minority sample count
    std::size_t n_percent = 1200;  // oversampling amount in percent
    std::size_t k = 1;          // neighbor count
    std::uint64_t seed = 0;

    void check_valid() const;                    // T >= 2, k >= 1, k <= T - 1, N% >= 1
    void check_valid_for(std::size_t n) const;   // additionally T <= n
};

/// A generated sample with full provenance: the joint vector
/// (features, target) equals (1 - lambda) * parent + lambda * neighbor.
struct SyntheticSample {
    std::vector<double> features;
    double target = 0.0;
    std::size_t parent_index = 0;
    std::size_t neighbor_index = 0;
    double lambda = 0.0;

    Sample to_sample() const { return Sample{features, target, Origin::synthetic}; }
};

/// One regression-to-classification relabeling: the chosen subset is the
/// minority class (label 1), everything else the majority class (label 2).
struct MinoritySplit {
    std::vector<std::size_t> minority_indices;

    static constexpr int kMinorityLabel = 1;
    static constexpr int kMajorityLabel = 2;
};

/// Indices of the k points closest to points[query_index] in Euclidean
/// distance, excluding the query itself, sorted ascending by distance with
/// ties broken by smaller index.
std::vector<std::size_t> knn(const std::vector<std::vector<double>>& points, std::size_t query_index,
                             std::size_t k);

/// Linear interpolation of features and target with one shared coefficient,
/// lambda in [0, 1). Provenance fields are filled from the index arguments.
SyntheticSample interpolate(const Sample& parent, const Sample& neighbor, double lambda,
                            std::size_t parent_index = 0, std::size_t neighbor_index = 0);

/// Classical SMOTE over one minority class. When N% < 100 the minority list
/// is shuffled and only the first floor(N% * T / 100) samples seed synthetics
/// (one each); neighbors always come from the full minority list. Otherwise
/// every minority sample seeds floor(N% / 100) synthetics, each built from a
/// uniformly chosen one of its k nearest neighbors and a fresh
/// lambda ~ U[0, 1). Parent/neighbor indices refer to the minority argument.
std::vector<SyntheticSample> smote(std::span<const Sample> minority, const SmoteConfig& cfg);

/// All C(n, T) index combinations in lexicographic order.
std::vector<MinoritySplit> enumerate_splits(std::size_t n, std::size_t t);

/// C(n, k); throws std::overflow_error if the count exceeds uint64.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// SMOTE-REG output: originals first (origin tags preserved), then the
/// surviving synthetics in generation order. original_count counts the
/// original rows that survive deduplication — all of them unless the input
/// itself contains duplicates. provenance[i] describes dataset row
/// original_count + i; parent/neighbor indices refer to rows of the input
/// dataset.
struct AugmentResult {
    Dataset dataset;
    std::vector<SyntheticSample> provenance;
    std::size_t original_count = 0;
    std::size_t split_count = 0;
    std::size_t synthetic_count_before_dedup = 0;
    std::size_t duplicates_removed = 0;
};

/// The regression extension: every size-T subset is relabeled as a minority
/// class, SMOTE runs on each (per-split sub-stream derived from cfg.seed, so
/// split results are order-independent), the union with the originals is
/// deduplicated keeping first occurrences.
AugmentResult smote_reg(const Dataset& data, const SmoteConfig& cfg, double dedup_tol = 0.0);

/// Augmented-CSV schema: dataset columns plus parent_index, neighbor_index,
/// lambda (empty cells for original rows), so interpolation invariants stay
/// externally checkable.
void write_augmented_csv(const AugmentResult& result, const std::string& path);
AugmentResult read_augmented_csv(const std::string& path,
                                 const std::vector<std::string>& feature_columns,
                                 const std::string& target_column);

}  // namespace nanoreg
