#include "nanoreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nanoreg/csv.hpp"
#include "nanoreg/rng.hpp"

// Emit an AVX2 variant of the hottest loops next to the baseline one and let
// the loader pick at startup. AVX2 here is pure lane-width: no fused
// multiply-add is enabled, so both variants produce bitwise-identical
// doubles and the binary still runs on CPUs without AVX2.
#if defined(__x86_64__) && defined(__has_attribute)
#if __has_attribute(target_clones)
#define NANOREG_WIDE_MATH __attribute__((target_clones("default", "avx2")))
#endif
#endif
#ifndef NANOREG_WIDE_MATH
#define NANOREG_WIDE_MATH
#endif

namespace nanoreg {

namespace {

constexpr std::uint64_t kInitStream = 101;
constexpr std::uint64_t kShuffleStream = 102;

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

void TrainConfig::check_valid() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
}

void MlpModel::check_shapes() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("model: need at least input and output layers");
    if (weights.size() != transition_count() || biases.size() != transition_count()) {
        throw std::invalid_argument("model: weight/bias count does not match layer count");
    }
    for (std::size_t t = 0; t < transition_count(); ++t) {
        if (weights[t].rows != layer_sizes[t + 1] || weights[t].cols != layer_sizes[t]) {
            throw std::invalid_argument("model: weight matrix " + std::to_string(t) + " has shape " +
                                        std::to_string(weights[t].rows) + "x" + std::to_string(weights[t].cols) +
                                        ", expected " + std::to_string(layer_sizes[t + 1]) + "x" +
                                        std::to_string(layer_sizes[t]));
        }
        if (biases[t].size() != layer_sizes[t + 1]) {
            throw std::invalid_argument("model: bias vector " + std::to_string(t) + " has wrong length");
        }
    }
    for (const Matrix& w : weights) {
        for (double v : w.data) {
            if (!std::isfinite(v)) throw std::invalid_argument("model: non-finite weight");
        }
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) throw std::invalid_argument("model: non-finite bias");
        }
    }
}

MlpModel init_params(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("init_params: need at least two layers");
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw std::invalid_argument("init_params: zero-width layer");
    }
    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.feature_standardizer = Standardizer{std::vector<double>(layer_sizes.front(), 0.0),
                                          std::vector<double>(layer_sizes.front(), 1.0)};
    m.target_standardizer = Standardizer{{0.0}, {1.0}};

    Rng rng(seed);
    for (std::size_t t = 0; t + 1 < layer_sizes.size(); ++t) {
        const std::size_t fan_in = layer_sizes[t];
        const std::size_t fan_out = layer_sizes[t + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data) v = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

namespace detail {

// Row-major batch activations, acts[l] holding B x layer_sizes[l] values.
struct BatchBuffers {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> deltas;
    std::vector<std::vector<double>> wt;  // column-major weight copies, in_w x out_w

    void resize(const std::vector<std::size_t>& sizes, std::size_t batch) {
        acts.resize(sizes.size());
        deltas.resize(sizes.size());
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            acts[l].resize(batch * sizes[l]);
            deltas[l].resize(batch * sizes[l]);
        }
        wt.resize(sizes.size() - 1);
        for (std::size_t t = 0; t + 1 < sizes.size(); ++t) wt[t].resize(sizes[t] * sizes[t + 1]);
    }
};

// acts[0] must hold the batch inputs; fills the remaining layers.
//
// The products run input-major over a column-major weight copy: every output
// still accumulates its terms in ascending input order (so the sums are
// bitwise identical to a row-major dot product), but the inner loop writes
// independent accumulators, which vectorizes where a single running sum
// cannot be reordered.
NANOREG_WIDE_MATH
void batch_forward(const MlpModel& m, std::size_t batch, BatchBuffers& buf) {
    const std::size_t transitions = m.transition_count();
    for (std::size_t t = 0; t < transitions; ++t) {
        const std::size_t in_w = m.layer_sizes[t];
        const std::size_t out_w = m.layer_sizes[t + 1];
        const bool hidden = t + 1 < m.layer_sizes.size() - 1;
        const double* w = m.weights[t].data.data();
        double* wc = buf.wt[t].data();
        for (std::size_t i = 0; i < in_w; ++i) {
            for (std::size_t o = 0; o < out_w; ++o) wc[i * out_w + o] = w[o * in_w + i];
        }
        const double* bias = m.biases[t].data();
        const double* in = buf.acts[t].data();
        double* out = buf.acts[t + 1].data();
        for (std::size_t b = 0; b < batch; ++b) {
            const double* x = in + b * in_w;
            double* y = out + b * out_w;
            std::copy(bias, bias + out_w, y);
            for (std::size_t i = 0; i < in_w; ++i) {
                const double xi = x[i];
                const double* wcol = wc + i * out_w;
                for (std::size_t o = 0; o < out_w; ++o) y[o] += wcol[o] * xi;
            }
            if (hidden) {
                for (std::size_t o = 0; o < out_w; ++o) y[o] = y[o] > 0.0 ? y[o] : 0.0;
            }
        }
    }
}

// Accumulates the exact batch-mean MSE gradient into grads (not zeroed here).
// buf must hold a completed forward pass for these targets.
NANOREG_WIDE_MATH
void batch_backward(const MlpModel& m, const double* targets, std::size_t batch, BatchBuffers& buf,
                    Gradients& grads) {
    const std::size_t last = m.layer_sizes.size() - 1;
    const double inv = 2.0 / static_cast<double>(batch);
    {
        const double* pred = buf.acts[last].data();
        double* delta = buf.deltas[last].data();
        for (std::size_t b = 0; b < batch; ++b) delta[b] = inv * (pred[b] - targets[b]);
    }
    for (std::size_t t = last; t-- > 0;) {
        const std::size_t in_w = m.layer_sizes[t];
        const std::size_t out_w = m.layer_sizes[t + 1];
        const double* delta_out = buf.deltas[t + 1].data();
        const double* act_in = buf.acts[t].data();
        double* dw = grads.weights[t].data.data();
        double* db = grads.biases[t].data();
        for (std::size_t b = 0; b < batch; ++b) {
            const double* d = delta_out + b * out_w;
            const double* a = act_in + b * in_w;
            for (std::size_t o = 0; o < out_w; ++o) {
                const double dv = d[o];
                if (dv == 0.0) continue;
                db[o] += dv;
                double* dwrow = dw + o * in_w;
                for (std::size_t i = 0; i < in_w; ++i) dwrow[i] += dv * a[i];
            }
        }
        if (t == 0) break;
        // delta_in[b,i] = relu_gate * sum_o delta_out[b,o] * W[o,i];
        // post-activation > 0 iff pre-activation > 0, and the gate at 0 is 0.
        const double* w = m.weights[t].data.data();
        double* delta_in = buf.deltas[t].data();
        for (std::size_t b = 0; b < batch; ++b) {
            const double* d = delta_out + b * out_w;
            const double* a = act_in + b * in_w;
            double* di = delta_in + b * in_w;
            std::fill(di, di + in_w, 0.0);
            for (std::size_t o = 0; o < out_w; ++o) {
                const double dv = d[o];
                if (dv == 0.0) continue;
                const double* wrow = w + o * in_w;
                for (std::size_t i = 0; i < in_w; ++i) di[i] += dv * wrow[i];
            }
            for (std::size_t i = 0; i < in_w; ++i) {
                if (!(a[i] > 0.0)) di[i] = 0.0;
            }
        }
    }
}

Gradients make_zero_gradients(const MlpModel& m) {
    Gradients g;
    for (std::size_t t = 0; t < m.transition_count(); ++t) {
        g.weights.emplace_back(m.layer_sizes[t + 1], m.layer_sizes[t]);
        g.biases.emplace_back(m.layer_sizes[t + 1], 0.0);
    }
    return g;
}

void check_batch(const MlpModel& m, const std::vector<std::vector<double>>& inputs,
                 std::span<const double> targets) {
    if (inputs.empty()) throw std::invalid_argument("backward: empty batch");
    if (inputs.size() != targets.size()) throw std::invalid_argument("backward: inputs/targets length mismatch");
    for (const auto& x : inputs) {
        if (x.size() != m.input_size()) throw std::invalid_argument("backward: input dimension mismatch");
    }
}

}  // namespace detail

double forward(const MlpModel& model, std::span<const double> x, ForwardTrace* trace) {
    if (x.size() != model.input_size()) {
        throw std::invalid_argument("forward: input length " + std::to_string(x.size()) + ", expected " +
                                    std::to_string(model.input_size()));
    }
    std::vector<double> current(x.begin(), x.end());
    if (trace) {
        trace->layers.clear();
        trace->layers.push_back(current);
    }
    for (std::size_t t = 0; t < model.transition_count(); ++t) {
        const Matrix& w = model.weights[t];
        const std::vector<double>& bias = model.biases[t];
        const bool hidden = t + 1 < model.layer_sizes.size() - 1;
        std::vector<double> next(w.rows);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double* wrow = w.row_ptr(o);
            double s = bias[o];
            for (std::size_t i = 0; i < w.cols; ++i) s += wrow[i] * current[i];
            next[o] = hidden ? (s > 0.0 ? s : 0.0) : s;
        }
        current = std::move(next);
        if (trace) trace->layers.push_back(current);
    }
    return current[0];
}

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw std::invalid_argument("mse_loss: length mismatch");
    if (predictions.empty()) throw std::invalid_argument("mse_loss: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = predictions[i] - targets[i];
        s += e * e;
    }
    return s / static_cast<double>(predictions.size());
}

Gradients backward(const MlpModel& model, const std::vector<std::vector<double>>& inputs,
                   std::span<const double> targets) {
    detail::check_batch(model, inputs, targets);
    const std::size_t batch = inputs.size();
    detail::BatchBuffers buf;
    buf.resize(model.layer_sizes, batch);
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy(inputs[b].begin(), inputs[b].end(), buf.acts[0].begin() + b * model.input_size());
    }
    detail::batch_forward(model, batch, buf);
    Gradients grads = detail::make_zero_gradients(model);
    detail::batch_backward(model, targets.data(), batch, buf, grads);
    return grads;
}

Gradients finite_difference_gradients(const MlpModel& model,
                                      const std::vector<std::vector<double>>& inputs,
                                      std::span<const double> targets, double eps) {
    detail::check_batch(model, inputs, targets);
    MlpModel probe = model;
    const std::size_t batch = inputs.size();

    auto batch_loss = [&]() {
        double s = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const double e = forward(probe, inputs[b]) - targets[b];
            s += e * e;
        }
        return s / static_cast<double>(batch);
    };

    auto central_diff = [&](double& param) {
        const double saved = param;
        param = saved + eps;
        const double up = batch_loss();
        param = saved - eps;
        const double down = batch_loss();
        param = saved;
        return (up - down) / (2.0 * eps);
    };

    Gradients grads = detail::make_zero_gradients(model);
    for (std::size_t t = 0; t < model.transition_count(); ++t) {
        for (std::size_t i = 0; i < probe.weights[t].data.size(); ++i) {
            grads.weights[t].data[i] = central_diff(probe.weights[t].data[i]);
        }
        for (std::size_t i = 0; i < probe.biases[t].size(); ++i) {
            grads.biases[t][i] = central_diff(probe.biases[t][i]);
        }
    }
    return grads;
}

namespace {

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::size_t step = 0;

    explicit AdamState(const MlpModel& model) {
        for (std::size_t t = 0; t < model.transition_count(); ++t) {
            m_w.emplace_back(model.layer_sizes[t + 1], model.layer_sizes[t]);
            v_w.emplace_back(model.layer_sizes[t + 1], model.layer_sizes[t]);
            m_b.emplace_back(model.layer_sizes[t + 1], 0.0);
            v_b.emplace_back(model.layer_sizes[t + 1], 0.0);
        }
    }
};

NANOREG_WIDE_MATH
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, double lr, double bc1, double bc2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
        params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kAdamEps);
    }
}

NANOREG_WIDE_MATH
void sgd_update(std::span<double> params, std::span<const double> grads, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

}  // namespace

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
    data.check_valid();
    cfg.check_valid();
    const std::size_t n = data.size();
    const std::size_t f = data.feature_count();
    const std::size_t batch_size = std::min(cfg.batch_size, n);

    MlpModel model = init_params({f, kHiddenWidth, kHiddenWidth, 1}, mix_seed(cfg.seed, kInitStream));
    model.feature_standardizer = fit_standardizer(data, false);
    if (cfg.standardize_target) {
        const Standardizer with_target = fit_standardizer(data, true);
        model.target_standardizer = Standardizer{{with_target.means[f]}, {with_target.stds[f]}};
    } else {
        model.target_standardizer = Standardizer{{0.0}, {1.0}};
    }

    // Flat z-scored training matrix.
    std::vector<double> xs(n * f);
    std::vector<double> ys(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Sample& s = data.samples[r];
        for (std::size_t c = 0; c < f; ++c) {
            xs[r * f + c] =
                (s.features[c] - model.feature_standardizer.means[c]) / model.feature_standardizer.stds[c];
        }
        ys[r] = (s.target - model.target_standardizer.means[0]) / model.target_standardizer.stds[0];
    }

    Gradients grads = detail::make_zero_gradients(model);
    AdamState adam(model);
    detail::BatchBuffers buf;
    buf.resize(model.layer_sizes, batch_size);
    std::vector<double> batch_targets(batch_size);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream));

    TrainReport report;
    report.loss_history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double sq_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t b_count = std::min(batch_size, n - start);
            for (std::size_t b = 0; b < b_count; ++b) {
                const std::size_t row = order[start + b];
                std::copy(xs.begin() + row * f, xs.begin() + (row + 1) * f, buf.acts[0].begin() + b * f);
                batch_targets[b] = ys[row];
            }
            detail::batch_forward(model, b_count, buf);
            const double* pred = buf.acts.back().data();
            for (std::size_t b = 0; b < b_count; ++b) {
                const double e = pred[b] - batch_targets[b];
                sq_sum += e * e;
            }

            for (Matrix& g : grads.weights) std::fill(g.data.begin(), g.data.end(), 0.0);
            for (auto& g : grads.biases) std::fill(g.begin(), g.end(), 0.0);
            detail::batch_backward(model, batch_targets.data(), b_count, buf, grads);

            if (cfg.optimizer == TrainConfig::Optimizer::adam) {
                ++adam.step;
                const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
                const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
                for (std::size_t t = 0; t < model.transition_count(); ++t) {
                    adam_update(model.weights[t].data, grads.weights[t].data, adam.m_w[t].data,
                                adam.v_w[t].data, cfg.learning_rate, bc1, bc2);
                    adam_update(model.biases[t], grads.biases[t], adam.m_b[t], adam.v_b[t],
                                cfg.learning_rate, bc1, bc2);
                }
            } else {
                for (std::size_t t = 0; t < model.transition_count(); ++t) {
                    sgd_update(model.weights[t].data, grads.weights[t].data, cfg.learning_rate);
                    sgd_update(model.biases[t], grads.biases[t], cfg.learning_rate);
                }
            }
        }
        const double epoch_loss = sq_sum / static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train: loss diverged (non-finite) at epoch " + std::to_string(epoch));
        }
        report.loss_history.push_back(epoch_loss);
    }
    report.final_epoch = cfg.epochs;
    return TrainResult{std::move(model), std::move(report)};
}

double predict(const MlpModel& model, std::span<const double> raw_features) {
    if (raw_features.size() != model.input_size()) {
        throw std::invalid_argument("predict: feature length " + std::to_string(raw_features.size()) +
                                    ", expected " + std::to_string(model.input_size()));
    }
    std::vector<double> z(raw_features.size());
    for (std::size_t c = 0; c < z.size(); ++c) {
        z[c] = (raw_features[c] - model.feature_standardizer.means[c]) / model.feature_standardizer.stds[c];
    }
    const double out = forward(model, z);
    return out * model.target_standardizer.stds[0] + model.target_standardizer.means[0];
}

std::vector<double> predict_all(const MlpModel& model, const Dataset& data) {
    std::vector<double> out;
    out.reserve(data.size());
    for (const Sample& s : data.samples) out.push_back(predict(model, s.features));
    return out;
}

namespace {

void write_doubles(std::ofstream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ' ';
        out << format_double(values[i]);
    }
    out << '\n';
}

}  // namespace

void save_model(const MlpModel& model, const std::string& path) {
    model.check_shapes();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << "nanoreg_model 1\n";
    out << "layers " << model.layer_sizes.size() << '\n';
    for (std::size_t i = 0; i < model.layer_sizes.size(); ++i) {
        if (i) out << ' ';
        out << model.layer_sizes[i];
    }
    out << '\n';
    out << "feature_standardizer " << model.feature_standardizer.column_count() << '\n';
    write_doubles(out, model.feature_standardizer.means);
    write_doubles(out, model.feature_standardizer.stds);
    out << "target_standardizer 1\n";
    write_doubles(out, model.target_standardizer.means);
    write_doubles(out, model.target_standardizer.stds);
    for (std::size_t t = 0; t < model.transition_count(); ++t) {
        out << "weights " << t << ' ' << model.weights[t].rows << ' ' << model.weights[t].cols << '\n';
        for (std::size_t r = 0; r < model.weights[t].rows; ++r) {
            for (std::size_t c = 0; c < model.weights[t].cols; ++c) {
                if (c) out << ' ';
                out << format_double(model.weights[t](r, c));
            }
            out << '\n';
        }
        out << "biases " << t << ' ' << model.biases[t].size() << '\n';
        write_doubles(out, model.biases[t]);
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

void expect_token(std::ifstream& in, const std::string& expected, const std::string& path) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw std::runtime_error("model file " + path + ": expected '" + expected + "', got '" + token + "'");
    }
}

void read_doubles(std::ifstream& in, std::vector<double>& values, std::size_t count,
                  const std::string& path) {
    values.resize(count);
    for (double& v : values) {
        if (!(in >> v)) throw std::runtime_error("model file " + path + ": truncated numeric block");
    }
}

}  // namespace

MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    expect_token(in, "nanoreg_model", path);
    std::size_t version = 0;
    in >> version;
    if (version != 1) throw std::runtime_error("model file " + path + ": unsupported version");

    MlpModel model;
    expect_token(in, "layers", path);
    std::size_t layer_count = 0;
    in >> layer_count;
    if (layer_count < 2 || layer_count > 64) throw std::runtime_error("model file " + path + ": bad layer count");
    model.layer_sizes.resize(layer_count);
    for (auto& s : model.layer_sizes) in >> s;

    expect_token(in, "feature_standardizer", path);
    std::size_t f = 0;
    in >> f;
    read_doubles(in, model.feature_standardizer.means, f, path);
    read_doubles(in, model.feature_standardizer.stds, f, path);
    expect_token(in, "target_standardizer", path);
    std::size_t tcols = 0;
    in >> tcols;
    read_doubles(in, model.target_standardizer.means, tcols, path);
    read_doubles(in, model.target_standardizer.stds, tcols, path);

    for (std::size_t t = 0; t + 1 < layer_count; ++t) {
        expect_token(in, "weights", path);
        std::size_t idx = 0, rows = 0, cols = 0;
        in >> idx >> rows >> cols;
        Matrix w(rows, cols);
        for (double& v : w.data) {
            if (!(in >> v)) throw std::runtime_error("model file " + path + ": truncated weights");
        }
        model.weights.push_back(std::move(w));
        expect_token(in, "biases", path);
        std::size_t bidx = 0, blen = 0;
        in >> bidx >> blen;
        std::vector<double> b;
        read_doubles(in, b, blen, path);
        model.biases.push_back(std::move(b));
    }
    if (!in) throw std::runtime_error("model file " + path + ": truncated");
    model.check_shapes();
    return model;
}

}  // namespace nanoreg
