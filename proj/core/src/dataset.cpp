#include "nanoreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "nanoreg/rng.hpp"

namespace nanoreg {

void Dataset::check_valid() const {
    if (samples.empty()) throw std::invalid_argument("dataset: sample count must be >= 1");
    if (target_name.empty()) throw std::invalid_argument("dataset: target name must be non-empty");
    const std::size_t f = feature_names.size();
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names) {
        if (name.empty()) throw std::invalid_argument("dataset: feature names must be non-empty");
        if (!seen.insert(name).second || name == target_name) {
            throw std::invalid_argument("dataset: column names must be unique: " + name);
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (s.features.size() != f) {
            throw std::invalid_argument("dataset: sample " + std::to_string(i) +
                                        " has feature length " + std::to_string(s.features.size()) +
                                        ", expected " + std::to_string(f));
        }
        if (!std::isfinite(s.target)) {
            throw std::invalid_argument("dataset: sample " + std::to_string(i) + " has non-finite target");
        }
        for (double v : s.features) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("dataset: sample " + std::to_string(i) + " has non-finite feature");
            }
        }
    }
}

std::vector<double> Standardizer::transform_row(const std::vector<double>& values) const {
    if (values.size() != means.size()) {
        throw std::invalid_argument("standardizer: expected " + std::to_string(means.size()) +
                                    " columns, got " + std::to_string(values.size()));
    }
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - means[i]) / stds[i];
    return out;
}

std::vector<double> Standardizer::inverse_transform_row(const std::vector<double>& values) const {
    if (values.size() != means.size()) {
        throw std::invalid_argument("standardizer: expected " + std::to_string(means.size()) +
                                    " columns, got " + std::to_string(values.size()));
    }
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * stds[i] + means[i];
    return out;
}

Standardizer fit_standardizer(const Dataset& data, bool include_target) {
    if (data.samples.empty()) throw std::invalid_argument("fit_standardizer: empty dataset");
    const std::size_t f = data.feature_count();
    const std::size_t cols = include_target ? f + 1 : f;
    const double n = static_cast<double>(data.size());

    Standardizer st;
    st.means.assign(cols, 0.0);
    st.stds.assign(cols, 0.0);
    for (const Sample& s : data.samples) {
        for (std::size_t c = 0; c < f; ++c) st.means[c] += s.features[c];
        if (include_target) st.means[f] += s.target;
    }
    for (double& m : st.means) m /= n;
    for (const Sample& s : data.samples) {
        for (std::size_t c = 0; c < f; ++c) {
            const double d = s.features[c] - st.means[c];
            st.stds[c] += d * d;
        }
        if (include_target) {
            const double d = s.target - st.means[f];
            st.stds[f] += d * d;
        }
    }
    for (double& v : st.stds) {
        v = std::sqrt(v / n);  // population convention
        if (v < 1e-12) v = 1.0;
    }
    return st;
}

namespace {

Dataset map_columns(const Standardizer& st, const Dataset& data, bool inverse) {
    const std::size_t f = data.feature_count();
    const bool with_target = st.column_count() == f + 1;
    if (!with_target && st.column_count() != f) {
        throw std::invalid_argument("transform: standardizer has " + std::to_string(st.column_count()) +
                                    " columns, dataset has " + std::to_string(f) + " features");
    }
    Dataset out = data;
    for (Sample& s : out.samples) {
        for (std::size_t c = 0; c < f; ++c) {
            s.features[c] = inverse ? s.features[c] * st.stds[c] + st.means[c]
                                    : (s.features[c] - st.means[c]) / st.stds[c];
        }
        if (with_target) {
            s.target = inverse ? s.target * st.stds[f] + st.means[f]
                               : (s.target - st.means[f]) / st.stds[f];
        }
    }
    return out;
}

}  // namespace

Dataset transform(const Standardizer& std_, const Dataset& data) { return map_columns(std_, data, false); }
Dataset inverse_transform(const Standardizer& std_, const Dataset& data) { return map_columns(std_, data, true); }

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_split: k must be >= 2");
    if (k > n) throw std::invalid_argument("kfold_split: k must be <= sample count");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) plan.assignments[perm[i]] = i % k;
    return plan;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
    Dataset out;
    out.feature_names = data.feature_names;
    out.target_name = data.target_name;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= data.size()) {
            throw std::out_of_range("subset: index " + std::to_string(i) + " out of range for " +
                                    std::to_string(data.size()) + " rows");
        }
        out.samples.push_back(data.samples[i]);
    }
    return out;
}

namespace {

// Exact-equality dedup key: the raw bit patterns of all coordinates, with
// -0.0 normalized so it collides with +0.0.
std::string row_key(const Sample& s) {
    std::string key;
    key.resize((s.features.size() + 1) * sizeof(double));
    char* out = key.data();
    auto put = [&out](double v) {
        if (v == 0.0) v = 0.0;  // collapse -0.0
        std::memcpy(out, &v, sizeof(double));
        out += sizeof(double);
    };
    for (double v : s.features) put(v);
    put(s.target);
    return key;
}

bool rows_match(const Sample& a, const Sample& b, double tol) {
    if (std::abs(a.target - b.target) > tol) return false;
    for (std::size_t c = 0; c < a.features.size(); ++c) {
        if (std::abs(a.features[c] - b.features[c]) > tol) return false;
    }
    return true;
}

}  // namespace

std::vector<std::size_t> dedup_indices(const Dataset& data, double tol) {
    if (tol < 0.0) throw std::invalid_argument("dedup: tolerance must be non-negative");
    std::vector<std::size_t> kept;
    kept.reserve(data.size());
    if (tol == 0.0) {
        std::unordered_set<std::string> seen;
        seen.reserve(data.size() * 2);
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (seen.insert(row_key(data.samples[i])).second) kept.push_back(i);
        }
        return kept;
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : kept) {
            if (rows_match(data.samples[i], data.samples[j], tol)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(i);
    }
    return kept;
}

Dataset dedup(const Dataset& data, double tol) {
    Dataset out;
    out.feature_names = data.feature_names;
    out.target_name = data.target_name;
    for (std::size_t i : dedup_indices(data, tol)) out.samples.push_back(data.samples[i]);
    return out;
}

namespace {

double unit(double v, double lo, double hi) { return (v - lo) / (hi - lo); }

}  // namespace

double benchmark_aspect_ratio(double core_edge_nm, double core_amount_nmol, double s_amount_mg) {
    const double u = unit(core_edge_nm, kCoreEdgeMin, kCoreEdgeMax);
    const double v = unit(core_amount_nmol, kCoreAmountMin, kCoreAmountMax);
    const double w = unit(s_amount_mg, kSAmountMin, kSAmountMax);
    return 6.1 + 0.5 * (1.0 - v) + 23.9 * std::pow(1.0 - v, 1.6) * (0.76 + 0.14 * u + 0.10 * w);
}

double benchmark_width(double core_edge_nm, double core_amount_nmol, double s_amount_mg) {
    const double u = unit(core_edge_nm, kCoreEdgeMin, kCoreEdgeMax);
    const double w = unit(s_amount_mg, kSAmountMin, kSAmountMax);
    (void)core_amount_nmol;
    return 3.2 + 1.8 * w + 0.5 * u;
}

double benchmark_length(double core_edge_nm, double core_amount_nmol, double s_amount_mg) {
    return benchmark_width(core_edge_nm, core_amount_nmol, s_amount_mg) *
           benchmark_aspect_ratio(core_edge_nm, core_amount_nmol, s_amount_mg);
}

std::vector<BenchmarkRow> synth_benchmark_rows(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("synth_benchmark: n must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> edge(kCoreEdgeMin, kCoreEdgeMax);
    std::uniform_real_distribution<double> amount(kCoreAmountMin, kCoreAmountMax);
    std::uniform_real_distribution<double> sulfur(kSAmountMin, kSAmountMax);

    std::vector<BenchmarkRow> rows(n);
    for (BenchmarkRow& r : rows) {
        r.core_edge_nm = edge(rng);
        r.core_amount_nmol = amount(rng);
        r.s_amount_mg = sulfur(rng);
        r.width_nm = benchmark_width(r.core_edge_nm, r.core_amount_nmol, r.s_amount_mg);
        r.aspect_ratio = benchmark_aspect_ratio(r.core_edge_nm, r.core_amount_nmol, r.s_amount_mg);
        r.length_nm = r.width_nm * r.aspect_ratio;
    }
    return rows;
}

const char* target_column_name(TargetKind kind) {
    switch (kind) {
        case TargetKind::length: return kLengthColumn;
        case TargetKind::width: return kWidthColumn;
        case TargetKind::aspect_ratio: return kAspectRatioColumn;
    }
    throw std::invalid_argument("target_column_name: unknown target kind");
}

Dataset synth_benchmark(std::size_t n, std::uint64_t seed, TargetKind target) {
    Dataset out;
    out.feature_names = {kCoreEdgeColumn, kCoreAmountColumn, kSAmountColumn};
    out.target_name = target_column_name(target);
    out.samples.reserve(n);
    for (const BenchmarkRow& r : synth_benchmark_rows(n, seed)) {
        Sample s;
        s.features = {r.core_edge_nm, r.core_amount_nmol, r.s_amount_mg};
        switch (target) {
            case TargetKind::length: s.target = r.length_nm; break;
            case TargetKind::width: s.target = r.width_nm; break;
            case TargetKind::aspect_ratio: s.target = r.aspect_ratio; break;
        }
        out.samples.push_back(std::move(s));
    }
    return out;
}

}  // namespace nanoreg
