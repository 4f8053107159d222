#pragma once
// End-to-end experiment driver: plans the cell cross-product, trains and
// evaluates each cell, persists checkpoints and reports, and renders the
// comparison tables. Completed cells are skipped on re-runs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cyclebench/config.hpp"
#include "cyclebench/metrics.hpp"
#include "cyclebench/recession_index.hpp"
#include "cyclebench/regime_splitter.hpp"

namespace cyclebench {

enum class FeatureVariant { base = 0, rf = 1 };
std::string to_string(FeatureVariant v);

struct CellSpec {
    int subperiod = 0;
    ModelKind kind = ModelKind::lstm;
    TrainVariant trainset = TrainVariant::iswor;
    FeatureVariant features = FeatureVariant::base;
    std::uint64_t index = 0;  // canonical position; the cell seed derives from it
};

// Canonical cell order: sub-period, then kind, then train set, then features.
std::vector<CellSpec> plan_cells(int n_subperiods, const ExperimentConfig& cfg);

struct RegimeMetrics {
    double mse, r2, cerg_gain;  // NaN when not computable
};

struct CellResult {
    CellSpec spec;
    std::string label;
    int width = 0, lag = 0;
    RegimeMetrics all{}, recession{}, expansion{};
    YearlyStats yearly;
    std::vector<std::string> warnings;
    bool failed = false;
    std::string error;
};

struct RunSummary {
    int completed = 0;
    int skipped_existing = 0;
    int failed = 0;
    std::string out_dir;
    std::vector<CellResult> results;
};

// Loads data, splits every sub-period, runs all planned cells (on `jobs`
// worker threads), and writes checkpoints, traces, splits.json, reports.csv
// and yearly.csv under cfg.out_dir. With force=false a cell whose .done file
// exists is reloaded instead of retrained.
RunSummary run_experiment(const ExperimentConfig& cfg, bool force = false, int jobs = 1,
                          std::ostream* log = nullptr);

struct ReportRow {
    std::string subperiod, model, trainset, features, regime;
    double mse, r2, cerg_gain;
};
std::vector<ReportRow> read_reports_csv(const std::string& path);
void write_reports_csv(const std::string& path, const std::vector<ReportRow>& rows);

enum class ComparisonKind { rt_vs_nrt, rf_vs_norf, recession_vs_expansion };
ComparisonKind comparison_from_string(const std::string& s);

struct ComparisonCount {
    std::string what;  // e.g. "recession MSE: NRT > RT"
    int hits = 0;
    int total = 0;
};
struct ComparisonReport {
    std::string text;  // rendered tables with footer counts
    std::vector<ComparisonCount> counts;
    std::vector<std::string> warnings;
};
ComparisonReport emit_comparison_report(const std::vector<ReportRow>& rows,
                                        ComparisonKind kind);

struct GbmRunOptions {
    int seeds = 30;
    bool strict_mean = false;
    TrainVariant trainset = TrainVariant::iswor;
};
struct GbmRunResult {
    std::vector<ReportRow> rows;  // per-sub-period seed medians, model = "gbm"
    double fraction_rec_gt_exp = 0.0;  // mean over seeds
    std::string text;
};
GbmRunResult run_gbm_experiment(const ExperimentConfig& cfg, const GbmRunOptions& opt);

// Rebuilds predictions for a saved checkpoint over the whole panel and
// returns the median-filtered squared-error index.
IndexSeries index_from_checkpoint(const ExperimentConfig& cfg, const std::string& ckpt_path,
                                  int window = 20);

}  // namespace cyclebench
