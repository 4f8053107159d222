// Microbenchmarks for the hot paths: window forward/backward passes at the
// grid widths, the Adam update, the median filter and the GBM sampler.

#include <benchmark/benchmark.h>

#include "cyclebench/adam.hpp"
#include "cyclebench/gbm.hpp"
#include "cyclebench/model.hpp"
#include "cyclebench/recession_index.hpp"
#include "cyclebench/rng.hpp"

namespace {

using namespace cyclebench;

constexpr int kInputDim = 5;
constexpr int kLag = 5;

ModelKind kind_of(int tag) {
    switch (tag) {
        case 0: return ModelKind::lstm;
        case 1: return ModelKind::blstm;
        default: return ModelKind::gru;
    }
}

Mat random_window(Rng& rng) {
    Mat w(kLag, kInputDim);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1.0, 1.0);
    return w;
}

void BM_Forward(benchmark::State& state) {
    Rng rng(1);
    const ModelParams p =
        glorot_init(kind_of(int(state.range(0))), int(state.range(1)), kInputDim, rng);
    const Mat window = random_window(rng);
    for (auto _ : state) benchmark::DoNotOptimize(model_forward(window, p));
}

void BM_Backward(benchmark::State& state) {
    Rng rng(2);
    const ModelParams p =
        glorot_init(kind_of(int(state.range(0))), int(state.range(1)), kInputDim, rng);
    const Mat window = random_window(rng);
    for (auto _ : state) {
        BackwardResult r = model_backward(window, 0.3, p, false, nullptr, 0.0, 1e-2);
        benchmark::DoNotOptimize(r.loss);
    }
}

void BM_AdamStep(benchmark::State& state) {
    Rng rng(3);
    ModelParams p = glorot_init(ModelKind::gru, int(state.range(0)), kInputDim, rng);
    ModelParams g = glorot_init(ModelKind::gru, int(state.range(0)), kInputDim, rng);
    AdamState st = make_adam_state(p);
    for (auto _ : state) {
        adam_step(p, g, st);
        benchmark::DoNotOptimize(p.dense_b);
    }
}

void BM_MedianFilter(benchmark::State& state) {
    Rng rng(4);
    std::vector<double> x(std::size_t(state.range(0)));
    for (double& v : x) v = rng.uniform();
    for (auto _ : state) benchmark::DoNotOptimize(median_filter(x, 20));
}

void BM_GbmSimulate(benchmark::State& state) {
    GbmParams p;
    p.v = 5e-4;
    p.sigma2 = 1e-4;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_logreturns(std::size_t(state.range(0)), p, 7));
}

}  // namespace

BENCHMARK(BM_Forward)->ArgsProduct({{0, 1, 2}, {32, 128}});
BENCHMARK(BM_Backward)->ArgsProduct({{0, 1, 2}, {32, 128}});
BENCHMARK(BM_AdamStep)->Arg(32)->Arg(128);
BENCHMARK(BM_MedianFilter)->Arg(10000);
BENCHMARK(BM_GbmSimulate)->Arg(100000);

BENCHMARK_MAIN();
