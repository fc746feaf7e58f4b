#include "nanoreg/oversample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nanoreg/csv.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {

void SmoteConfig::check_valid() const {
    if (t < 2) throw std::invalid_argument("smote: T must be >= 2");
    if (k < 1) throw std::invalid_argument("smote: k must be >= 1");
    if (k > t - 1) {
        throw std::invalid_argument("smote: k must be <= T - 1 (neighbors come from the minority class), got k=" +
                                    std::to_string(k) + " with T=" + std::to_string(t));
    }
    if (n_percent < 1) throw std::invalid_argument("smote: N% must be positive");
}

void SmoteConfig::check_valid_for(std::size_t n) const {
    check_valid();
    if (t > n) {
        throw std::invalid_argument("smote: T=" + std::to_string(t) + " exceeds dataset size " +
                                    std::to_string(n));
    }
}

std::vector<std::size_t> knn(const std::vector<std::vector<double>>& points, std::size_t query_index,
                             std::size_t k) {
    const std::size_t n = points.size();
    if (query_index >= n) throw std::invalid_argument("knn: query index out of range");
    if (k < 1 || k > n - 1) {
        throw std::invalid_argument("knn: k must be in [1, n-1], got k=" + std::to_string(k) +
                                    " with n=" + std::to_string(n));
    }
    const std::vector<double>& q = points[query_index];

    // Bounded selection: keep the k best (squared distance, index) pairs in a
    // max-heap instead of sorting all n candidates.
    using Entry = std::pair<double, std::size_t>;
    std::vector<Entry> heap;
    heap.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == query_index) continue;
        if (points[i].size() != q.size()) throw std::invalid_argument("knn: dimension mismatch");
        double d2 = 0.0;
        for (std::size_t c = 0; c < q.size(); ++c) {
            const double d = points[i][c] - q[c];
            d2 += d * d;
        }
        const Entry e{d2, i};
        if (heap.size() < k) {
            heap.push_back(e);
            std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = e;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    std::sort(heap.begin(), heap.end());  // ascending distance, ties by smaller index
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
    return out;
}

SyntheticSample interpolate(const Sample& parent, const Sample& neighbor, double lambda,
                            std::size_t parent_index, std::size_t neighbor_index) {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("interpolate: lambda must be in [0, 1)");
    }
    if (parent.features.size() != neighbor.features.size()) {
        throw std::invalid_argument("interpolate: feature length mismatch");
    }
    SyntheticSample s;
    s.features.resize(parent.features.size());
    for (std::size_t c = 0; c < parent.features.size(); ++c) {
        s.features[c] = parent.features[c] + lambda * (neighbor.features[c] - parent.features[c]);
    }
    s.target = parent.target + lambda * (neighbor.target - parent.target);
    s.parent_index = parent_index;
    s.neighbor_index = neighbor_index;
    s.lambda = lambda;
    return s;
}

std::vector<SyntheticSample> smote(std::span<const Sample> minority, const SmoteConfig& cfg) {
    cfg.check_valid();
    if (minority.size() != cfg.t) {
        throw std::invalid_argument("smote: minority size " + std::to_string(minority.size()) +
                                    " does not match T=" + std::to_string(cfg.t));
    }

    Rng rng(cfg.seed);

    // Seed samples: all of the minority class for N% >= 100, otherwise a
    // shuffled prefix of floor(N% * T / 100). Neighbor candidates are always
    // the full minority list.
    std::vector<std::size_t> seeds(minority.size());
    std::iota(seeds.begin(), seeds.end(), std::size_t{0});
    std::size_t per_seed = 0;
    if (cfg.n_percent < 100) {
        std::shuffle(seeds.begin(), seeds.end(), rng);
        seeds.resize((cfg.n_percent * cfg.t) / 100);
        per_seed = 1;
    } else {
        per_seed = cfg.n_percent / 100;
    }

    std::vector<std::vector<double>> points;
    points.reserve(minority.size());
    for (const Sample& s : minority) points.push_back(s.features);

    std::vector<SyntheticSample> out;
    out.reserve(seeds.size() * per_seed);
    std::uniform_int_distribution<std::size_t> pick_neighbor(0, cfg.k - 1);
    std::uniform_real_distribution<double> pick_lambda(0.0, 1.0);
    for (std::size_t seed_idx : seeds) {
        const std::vector<std::size_t> neighbors = knn(points, seed_idx, cfg.k);
        for (std::size_t j = 0; j < per_seed; ++j) {
            const std::size_t nn = neighbors[pick_neighbor(rng)];
            const double lambda = pick_lambda(rng);
            out.push_back(interpolate(minority[seed_idx], minority[nn], lambda, seed_idx, nn));
        }
    }
    return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t factor = n - k + i;
        if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
            throw std::overflow_error("binomial: C(" + std::to_string(n) + ", " + std::to_string(k) +
                                      ") exceeds uint64 range");
        }
        result = result * factor / i;  // exact: result * factor is divisible by i here
    }
    return result;
}

std::vector<MinoritySplit> enumerate_splits(std::size_t n, std::size_t t) {
    if (t < 2 || t > n) throw std::invalid_argument("enumerate_splits: need 2 <= T <= n");
    const std::uint64_t count = binomial(n, t);
    if (count > 50'000'000ULL) {
        throw std::invalid_argument("enumerate_splits: C(n, T) = " + std::to_string(count) +
                                    " combinations is too large to materialize");
    }
    std::vector<MinoritySplit> splits;
    splits.reserve(static_cast<std::size_t>(count));

    std::vector<std::size_t> combo(t);
    std::iota(combo.begin(), combo.end(), std::size_t{0});
    while (true) {
        splits.push_back(MinoritySplit{combo});
        // Advance to the next lexicographic combination.
        std::size_t i = t;
        while (i-- > 0) {
            if (combo[i] != i + n - t) {
                ++combo[i];
                for (std::size_t j = i + 1; j < t; ++j) combo[j] = combo[j - 1] + 1;
                break;
            }
            if (i == 0) return splits;
        }
    }
}

AugmentResult smote_reg(const Dataset& data, const SmoteConfig& cfg, double dedup_tol) {
    data.check_valid();
    cfg.check_valid_for(data.size());

    const std::vector<MinoritySplit> splits = enumerate_splits(data.size(), cfg.t);

    Dataset combined;
    combined.feature_names = data.feature_names;
    combined.target_name = data.target_name;
    combined.samples = data.samples;  // originals first, tags preserved

    std::vector<SyntheticSample> provenance;
    std::vector<Sample> minority(cfg.t);
    for (std::size_t split_idx = 0; split_idx < splits.size(); ++split_idx) {
        const MinoritySplit& split = splits[split_idx];
        for (std::size_t i = 0; i < cfg.t; ++i) minority[i] = data.samples[split.minority_indices[i]];

        SmoteConfig sub = cfg;
        sub.seed = mix_seed(cfg.seed, split_idx);
        for (SyntheticSample& s : smote(minority, sub)) {
            // Remap provenance from minority-local to dataset row indices.
            s.parent_index = split.minority_indices[s.parent_index];
            s.neighbor_index = split.minority_indices[s.neighbor_index];
            combined.samples.push_back(s.to_sample());
            provenance.push_back(std::move(s));
        }
    }

    AugmentResult result;
    result.split_count = splits.size();
    result.synthetic_count_before_dedup = provenance.size();

    const std::size_t input_count = data.size();
    const std::vector<std::size_t> kept = dedup_indices(combined, dedup_tol);
    result.duplicates_removed = combined.size() - kept.size();
    result.dataset.feature_names = combined.feature_names;
    result.dataset.target_name = combined.target_name;
    result.dataset.samples.reserve(kept.size());
    result.provenance.reserve(kept.size());
    for (std::size_t idx : kept) {
        result.dataset.samples.push_back(std::move(combined.samples[idx]));
        if (idx >= input_count) {
            result.provenance.push_back(std::move(provenance[idx - input_count]));
        } else {
            ++result.original_count;
        }
    }
    return result;
}

void write_augmented_csv(const AugmentResult& result, const std::string& path) {
    const Dataset& data = result.dataset;
    CsvTable table;
    table.header = data.feature_names;
    table.header.push_back(data.target_name);
    table.header.insert(table.header.end(), {"parent_index", "neighbor_index", "lambda"});

    table.rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data.samples[i];
        std::vector<std::string> row;
        row.reserve(table.header.size());
        for (double v : s.features) row.push_back(format_double(v));
        row.push_back(format_double(s.target));
        if (i >= result.original_count) {
            const SyntheticSample& p = result.provenance[i - result.original_count];
            row.push_back(std::to_string(p.parent_index));
            row.push_back(std::to_string(p.neighbor_index));
            row.push_back(format_double(p.lambda));
        } else {
            row.insert(row.end(), {"", "", ""});
        }
        table.rows.push_back(std::move(row));
    }
    write_csv_table(path, table);
}

AugmentResult read_augmented_csv(const std::string& path,
                                 const std::vector<std::string>& feature_columns,
                                 const std::string& target_column) {
    const CsvTable table = read_csv_table(path);
    const std::size_t parent_col = table.column_index("parent_index");
    const std::size_t neighbor_col = table.column_index("neighbor_index");
    const std::size_t lambda_col = table.column_index("lambda");

    std::vector<std::size_t> feature_idx;
    for (const auto& name : feature_columns) feature_idx.push_back(table.column_index(name));
    const std::size_t target_idx = table.column_index(target_column);

    AugmentResult result;
    result.dataset.feature_names = feature_columns;
    result.dataset.target_name = target_column;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        Sample s;
        for (std::size_t c = 0; c < feature_idx.size(); ++c) {
            s.features.push_back(parse_double_cell(row.at(feature_idx[c]), r + 1, feature_columns[c]));
        }
        s.target = parse_double_cell(row.at(target_idx), r + 1, target_column);

        const bool synthetic = !row.at(parent_col).empty();
        s.origin = synthetic ? Origin::synthetic : Origin::original;
        if (synthetic) {
            SyntheticSample p;
            p.features = s.features;
            p.target = s.target;
            p.parent_index = static_cast<std::size_t>(
                parse_double_cell(row.at(parent_col), r + 1, "parent_index"));
            p.neighbor_index = static_cast<std::size_t>(
                parse_double_cell(row.at(neighbor_col), r + 1, "neighbor_index"));
            p.lambda = parse_double_cell(row.at(lambda_col), r + 1, "lambda");
            result.provenance.push_back(std::move(p));
        } else {
            if (!result.provenance.empty()) {
                throw CsvError("row " + std::to_string(r + 1) +
                               ": original rows must precede synthetic rows");
            }
            ++result.original_count;
        }
        result.dataset.samples.push_back(std::move(s));
    }
    result.dataset.check_valid();
    result.synthetic_count_before_dedup = result.provenance.size();
    return result;
}

}  // namespace nanoreg
