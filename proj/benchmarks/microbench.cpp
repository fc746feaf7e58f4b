#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nanoreg/dataset.hpp"
#include "nanoreg/explain.hpp"
#include "nanoreg/model.hpp"
#include "nanoreg/oversample.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {
namespace {

std::vector<std::vector<double>> random_points(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<std::vector<double>> points(n);
    for (auto& p : points) p = {u(rng), u(rng), u(rng)};
    return points;
}

// All-queries nearest-neighbor pass over n 3-D points, the inner kernel of
// the oversampler (state.range(0) = point count).
void BM_KnnAllQueries(benchmark::State& state) {
    const auto points = random_points(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) {
        for (std::size_t q = 0; q < points.size(); ++q) {
            benchmark::DoNotOptimize(knn(points, q, 1));
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnAllQueries)->Arg(28)->Arg(200);

// Full oversampling run at production defaults: 28 rows -> 9,100.
void BM_SmoteReg28To9100(benchmark::State& state) {
    const Dataset base = synth_benchmark(28, 3);
    SmoteConfig cfg;
    cfg.seed = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(smote_reg(base, cfg));
    }
}
BENCHMARK(BM_SmoteReg28To9100)->Unit(benchmark::kMillisecond);

// One analytic-gradient evaluation for a 32-row minibatch on the production
// architecture — the training step's dominant cost.
void BM_BackwardBatch32(benchmark::State& state) {
    const MlpModel model = init_params({3, 64, 64, 1}, 7);
    Rng rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<std::vector<double>> xs(32);
    std::vector<double> ys(32);
    for (std::size_t i = 0; i < 32; ++i) {
        xs[i] = {u(rng), u(rng), u(rng)};
        ys[i] = u(rng);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(backward(model, xs, ys));
    }
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_BackwardBatch32);

// One full training epoch (forward + backward + optimizer) over the 9,100-row
// augmented dataset; includes the one-off standardizer fit and weight init.
void BM_TrainOneEpoch9100(benchmark::State& state) {
    const Dataset base = synth_benchmark(28, 3);
    SmoteConfig smote_cfg;
    smote_cfg.seed = 5;
    const Dataset augmented = smote_reg(base, smote_cfg).dataset;
    TrainConfig cfg;
    cfg.epochs = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train(augmented, cfg));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(augmented.size()));
}
BENCHMARK(BM_TrainOneEpoch9100)->Unit(benchmark::kMillisecond);

// One local explanation at the default 5,000 perturbations.
void BM_ExplainDefaultBudget(benchmark::State& state) {
    const BlackBox fn = [](std::span<const double> x) {
        return 1.5 * x[0] - 0.7 * x[1] + 0.2 * x[2];
    };
    Standardizer training;
    training.means = {0.0, 0.0, 0.0};
    training.stds = {1.0, 2.0, 0.5};
    const std::vector<double> instance = {0.5, -1.0, 2.0};
    LimeConfig cfg;
    cfg.seed = 13;
    for (auto _ : state) {
        benchmark::DoNotOptimize(explain(fn, instance, training, cfg));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n_perturb));
}
BENCHMARK(BM_ExplainDefaultBudget)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace nanoreg
