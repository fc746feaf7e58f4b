#include "nanoreg/explain.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "nanoreg/csv.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {

void LimeConfig::check_valid() const {
    if (n_perturb < 2) throw std::invalid_argument("lime: n_perturb must be >= 2");
    if (!(perturb_scale > 0.0)) throw std::invalid_argument("lime: perturb_scale must be positive");
    if (kernel_width && !(*kernel_width > 0.0)) {
        throw std::invalid_argument("lime: kernel_width must be positive");
    }
    if (!(ridge_lambda >= 0.0)) throw std::invalid_argument("lime: ridge_lambda must be >= 0");
}

double LimeConfig::effective_kernel_width(std::size_t feature_count) const {
    if (kernel_width) return *kernel_width;
    return 0.75 * std::sqrt(static_cast<double>(feature_count));
}

namespace {

void check_stds(std::span<const double> instance, std::span<const double> feature_stds,
                const char* where) {
    if (instance.size() != feature_stds.size()) {
        throw std::invalid_argument(std::string(where) + ": " + std::to_string(feature_stds.size()) +
                                    " stds for " + std::to_string(instance.size()) + " features");
    }
    for (double s : feature_stds) {
        if (!(s > 0.0)) throw std::invalid_argument(std::string(where) + ": feature stds must be positive");
    }
}

}  // namespace

std::vector<std::vector<double>> perturb(std::span<const double> instance,
                                         std::span<const double> feature_stds, const LimeConfig& cfg) {
    cfg.check_valid();
    check_stds(instance, feature_stds, "perturb");

    std::vector<std::vector<double>> rows;
    rows.reserve(cfg.n_perturb);
    rows.emplace_back(instance.begin(), instance.end());

    Rng rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t r = 1; r < cfg.n_perturb; ++r) {
        std::vector<double> row(instance.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = instance[j] + cfg.perturb_scale * feature_stds[j] * noise(rng);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> kernel_weights(const std::vector<std::vector<double>>& perturbations,
                                   std::span<const double> instance,
                                   std::span<const double> feature_stds, double kernel_width) {
    if (!(kernel_width > 0.0)) throw std::invalid_argument("kernel_weights: width must be positive");
    check_stds(instance, feature_stds, "kernel_weights");

    std::vector<double> weights;
    weights.reserve(perturbations.size());
    const double inv_w2 = 1.0 / (kernel_width * kernel_width);
    for (const auto& row : perturbations) {
        if (row.size() != instance.size()) {
            throw std::invalid_argument("kernel_weights: ragged perturbation row");
        }
        double d2 = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double z = (row[j] - instance[j]) / feature_stds[j];
            d2 += z * z;
        }
        weights.push_back(std::exp(-d2 * inv_w2));
    }
    return weights;
}

Explanation fit_local_linear(const std::vector<std::vector<double>>& rows,
                             std::span<const double> responses, std::span<const double> sample_weights,
                             double ridge_lambda) {
    if (rows.empty()) throw std::invalid_argument("local fit: no rows");
    const std::size_t f = rows[0].size();
    const std::size_t p = f + 1;  // intercept plus one coefficient per feature
    if (rows.size() < p) {
        throw std::invalid_argument("local fit: need at least " + std::to_string(p) + " rows for " +
                                    std::to_string(f) + " features, got " + std::to_string(rows.size()));
    }
    if (responses.size() != rows.size() || sample_weights.size() != rows.size()) {
        throw std::invalid_argument("local fit: rows/responses/weights length mismatch");
    }
    if (!(ridge_lambda >= 0.0)) throw std::invalid_argument("local fit: ridge_lambda must be >= 0");
    double weight_sum = 0.0;
    for (double w : sample_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("local fit: sample weights must be non-negative");
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) throw std::invalid_argument("local fit: all sample weights are zero");

    // Normal equations for the design [1, x_1..x_f]: a = X^T W X (+ ridge on
    // the coefficient block only), b = X^T W y.
    Matrix a(p, p);
    std::vector<double> b(p, 0.0);
    std::vector<double> x(p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != f) throw std::invalid_argument("local fit: ragged design row");
        const double w = sample_weights[r];
        if (w == 0.0) continue;
        x[0] = 1.0;
        for (std::size_t j = 0; j < f; ++j) x[j + 1] = rows[r][j];
        for (std::size_t i = 0; i < p; ++i) {
            const double wx = w * x[i];
            for (std::size_t j = i; j < p; ++j) a(i, j) += wx * x[j];
            b[i] += wx * responses[r];
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i);
    }
    for (std::size_t i = 1; i < p; ++i) a(i, i) += ridge_lambda;

    std::vector<double> beta;
    try {
        beta = solve_spd(a, b);
    } catch (const std::runtime_error&) {
        throw std::runtime_error(
            "local fit: singular weighted system; the perturbations do not span the feature space "
            "(a larger ridge_lambda or more perturbations would be needed)");
    }

    Explanation e;
    e.intercept = beta[0];
    e.weights.assign(beta.begin() + 1, beta.end());

    // Weighted R^2 of the surrogate against the black-box responses.
    const double response_mean_w = [&] {
        double s = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) s += sample_weights[r] * responses[r];
        return s / weight_sum;
    }();
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double fit = e.intercept;
        for (std::size_t j = 0; j < f; ++j) fit += e.weights[j] * rows[r][j];
        const double res = responses[r] - fit;
        const double dev = responses[r] - response_mean_w;
        ss_res += sample_weights[r] * res * res;
        ss_tot += sample_weights[r] * dev * dev;
    }
    if (ss_tot > 0.0) e.local_r2 = 1.0 - ss_res / ss_tot;
    return e;
}

Explanation explain(const BlackBox& fn, std::span<const double> instance,
                    const Standardizer& training_stats, const LimeConfig& cfg) {
    if (!fn) throw std::invalid_argument("explain: empty black box");
    check_stds(instance, training_stats.stds, "explain");

    const auto rows = perturb(instance, training_stats.stds, cfg);
    std::vector<double> responses;
    responses.reserve(rows.size());
    for (const auto& row : rows) responses.push_back(fn(row));

    const double width = cfg.effective_kernel_width(instance.size());
    const auto weights = kernel_weights(rows, instance, training_stats.stds, width);

    // Fit on standardized offsets so the reported weights are per feature-std.
    std::vector<std::vector<double>> z_rows(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        z_rows[r].resize(instance.size());
        for (std::size_t j = 0; j < instance.size(); ++j) {
            z_rows[r][j] = (rows[r][j] - instance[j]) / training_stats.stds[j];
        }
    }
    Explanation e = fit_local_linear(z_rows, responses, weights, cfg.ridge_lambda);
    e.instance.assign(instance.begin(), instance.end());
    return e;
}

Explanation explain(const MlpModel& model, std::span<const double> instance, const LimeConfig& cfg) {
    return explain([&model](std::span<const double> x) { return predict(model, x); }, instance,
                   model.feature_standardizer, cfg);
}

Matrix weight_matrix(const BlackBox& fn, const Dataset& data, const Standardizer& training_stats,
                     const LimeConfig& cfg) {
    data.check_valid();
    cfg.check_valid();
    Matrix m(data.size(), data.feature_count());
    for (std::size_t r = 0; r < data.size(); ++r) {
        LimeConfig row_cfg = cfg;
        row_cfg.seed = mix_seed(cfg.seed, r);
        const Explanation e = explain(fn, data.samples[r].features, training_stats, row_cfg);
        for (std::size_t j = 0; j < data.feature_count(); ++j) m(r, j) = e.weights[j];
    }
    return m;
}

Matrix weight_matrix(const MlpModel& model, const Dataset& data, const LimeConfig& cfg) {
    return weight_matrix([&model](std::span<const double> x) { return predict(model, x); }, data,
                         model.feature_standardizer, cfg);
}

void write_weight_matrix_csv(const Matrix& weights, const Dataset& data, const std::string& path) {
    if (weights.rows != data.size() || weights.cols != data.feature_count()) {
        throw std::invalid_argument("weight matrix export: matrix is " + std::to_string(weights.rows) +
                                    "x" + std::to_string(weights.cols) + ", dataset is " +
                                    std::to_string(data.size()) + "x" +
                                    std::to_string(data.feature_count()));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weight matrix: " + path);
    out << "sample_id";
    for (const std::string& name : data.feature_names) out << ",weight_" << name;
    for (const std::string& name : data.feature_names) out << ",abs_weight_" << name;
    out << '\n';
    for (std::size_t r = 0; r < weights.rows; ++r) {
        out << (r + 1);
        for (std::size_t j = 0; j < weights.cols; ++j) out << ',' << format_double10(weights(r, j));
        for (std::size_t j = 0; j < weights.cols; ++j) out << ',' << format_double10(std::abs(weights(r, j)));
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace nanoreg
