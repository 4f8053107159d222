#pragma once
// Window construction, z-score normalization, the Adam training loop with
// early stopping, and the width/lag grid search.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cyclebench/adam.hpp"
#include "cyclebench/market_data.hpp"
#include "cyclebench/model.hpp"

namespace cyclebench {

struct HyperParams {
    int width = 32;
    int lag = 5;
};

struct Normalizer {
    double mean = 0.0;
    double sd = 1.0;
    int fit_first = -1, fit_last = -1;  // panel row span the statistics came from
    double apply(double x) const { return (x - mean) / sd; }
    double invert(double z) const { return z * sd + mean; }
};

// Mean and sample standard deviation (n-1); throws on fewer than two values
// or zero variance.
Normalizer fit_normalizer(const std::vector<double>& values);

struct Window {
    Mat x;               // lag x input_dim, oldest step first
    double target = 0.0;
    int target_row = -1;  // panel row the target came from
};

// One window per row in `rows` whose `lag` predecessors all exist in the
// panel; rows too close to the start are skipped. The window covers panel
// rows r-lag .. r-1 and the target is the close at row r.
std::vector<Window> make_windows(const FeaturePanel& panel, const std::vector<int>& rows,
                                 int lag);

std::vector<Normalizer> fit_feature_normalizers(const FeaturePanel& panel,
                                                const std::vector<int>& rows);
Normalizer fit_target_normalizer(const FeaturePanel& panel, const std::vector<int>& rows);
std::vector<Window> normalize_windows(const std::vector<Window>& windows,
                                      const std::vector<Normalizer>& features,
                                      const Normalizer& target);

struct TrainConfig {
    double lr = 1e-3;
    double l2 = 1e-2;
    double dropout = 0.2;
    int patience = 10;
    int max_epochs = 200;
    int batch = 32;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainedModel {
    ModelParams params;
    HyperParams hyper;
    std::vector<Normalizer> feature_norms;  // attached by grid_search
    Normalizer target_norm;
    std::vector<EpochStats> trace;  // trace[0] is the pre-training evaluation
    int best_epoch = 0;             // index into trace
    std::uint64_t seed = 0;
    double best_val_mse() const { return trace[static_cast<std::size_t>(best_epoch)].val_mse; }
};

// Trains on normalized windows; restores the parameters of the best
// validation epoch before returning. Deterministic for a fixed seed.
TrainedModel train_model(ModelKind kind, const HyperParams& hyper,
                         const std::vector<Window>& train, const std::vector<Window>& val,
                         const TrainConfig& cfg,
                         LstmHSource h_source = LstmHSource::candidate);

// Evaluation-mode prediction on a raw (unnormalized) window, inverted back to
// price space.
double predict_window(const TrainedModel& tm, const Window& raw);

struct GridSpec {
    std::vector<int> widths{32, 64, 128};
    std::vector<int> lags{5, 7, 9};
};

// The data a grid search slices into windows, one lag at a time.
struct GridData {
    const FeaturePanel* panel = nullptr;
    std::vector<int> train_rows, val_rows;
};

using TrainFn = std::function<TrainedModel(ModelKind, const HyperParams&,
                                           const std::vector<Window>&,
                                           const std::vector<Window>&, const TrainConfig&,
                                           LstmHSource)>;

struct GridResult {
    TrainedModel model;  // winner, with normalizers attached
    std::vector<std::string> warnings;
};

// Trains every (width, lag) combination; the grid point with the lowest best
// validation MSE wins, ties resolved toward smaller width, then smaller lag.
// Each point trains with seed = cfg.seed xor its row-major grid index.
// `trainer` defaults to train_model and exists so tests can stub it.
GridResult grid_search(ModelKind kind, const GridSpec& grid, const GridData& data,
                       const TrainConfig& cfg,
                       LstmHSource h_source = LstmHSource::candidate,
                       TrainFn trainer = {});

void write_trace_csv(const std::string& path, const TrainedModel& tm);

}  // namespace cyclebench
