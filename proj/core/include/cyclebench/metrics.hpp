#pragma once
// Evaluation metrics: z-scored MSE, out-of-sample R^2 on equity risk
// premia, the certainty-equivalent return gain, Pearson correlation and
// yearly log-return statistics.

#include <cstdint>
#include <string>
#include <vector>

#include "cyclebench/date.hpp"
#include "cyclebench/market_data.hpp"

namespace cyclebench {

// Aligned true and predicted price paths over an evaluation span. A NaN in
// s_pred means the model issued no prediction for that row (for example the
// first `lag` rows of a segment). row_index carries the originating panel
// rows; log-returns are only formed across consecutive panel rows, so gaps
// (an out-of-sample set made of two separated blocks, say) never produce a
// spurious return. An empty row_index means the series is contiguous.
struct EvaluationSeries {
    std::vector<Date> dates;
    std::vector<double> s_true;
    std::vector<double> s_pred;
    std::vector<double> rf;  // daily rate; empty when unavailable
    std::vector<std::uint8_t> recession;
    std::vector<int> row_index;

    std::size_t size() const { return s_true.size(); }
    bool has_rf() const { return !rf.empty(); }
    bool contiguous_at(std::size_t t) const {
        return row_index.empty() || row_index[t] == row_index[t - 1] + 1;
    }
};

// rows must be strictly increasing panel rows; preds aligns with rows and may
// contain NaN for uncovered rows.
EvaluationSeries make_eval_series(const FeaturePanel& panel, const std::vector<int>& rows,
                                  const std::vector<double>& preds);

enum class RegimeFilter { all, recession, expansion };
enum class MseNormalizer {
    per_filter,  // z fitted on the filtered slice of Y (default)
    shared,      // z fitted once on every predicted row's Y
};

// Mean of (z(Y) - z(Yhat))^2 over rows passing the regime filter that carry a
// prediction; z is fitted on Y only.
double normalized_mse(const EvaluationSeries& ev, RegimeFilter filter = RegimeFilter::all,
                      MseNormalizer normalizer = MseNormalizer::per_filter);

// Entry t (t >= 1) pairs row t with row t-1; arrays align with the
// EvaluationSeries, entry 0 is never valid.
struct ErpSeries {
    std::vector<double> erp_true;  // ln(S_t/S_{t-1}) - rf_t
    std::vector<double> erp_pred;  // ln(Shat_t/S_{t-1}) - rf_{t-1}
    std::vector<double> hist_avg;  // expanding mean of valid erp_true before t
    std::vector<std::uint8_t> valid;       // consecutive rows, finite prices
    std::vector<std::uint8_t> pred_valid;  // valid and a prediction exists at t
    std::vector<std::uint8_t> hist_valid;  // at least one valid entry before t
    std::vector<std::uint8_t> recession;   // copied flag at t
};

// symmetrize_rf replaces the index asymmetry (rf_{t-1} in the predicted leg,
// rf_t in the realized one) with rf_t on both.
ErpSeries erp_series(const EvaluationSeries& ev, bool symmetrize_rf = false);

// 1 - sum((erp_true - erp_pred)^2) / sum((erp_true - hist_avg)^2) over entries
// that have a prediction and a history, optionally regime-filtered.
double oos_r_squared(const ErpSeries& e, RegimeFilter filter = RegimeFilter::all);

struct CergInputs {
    std::vector<double> oos_pred_logreturns;  // Rhat_t
    std::vector<double> pre_oos_logreturns;   // realized R_t before the OOS span
    double gamma = 3.0;
};
// U = mean - (gamma/2) * sample variance for each series; returns U_p - U_b.
double cerg(const CergInputs& c);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct YearlyStat {
    int year = 0;
    int count = 0;          // log-return observations in the year
    double logret_mse = 0;  // mean of (predicted - realized log-return)^2
    double logret_sd = 0;   // sample SD of realized log-returns
};
struct YearlyStats {
    std::vector<YearlyStat> years;  // ascending; years with < 2 observations omitted
    std::vector<std::string> warnings;
};
YearlyStats yearly_logreturn_stats(const EvaluationSeries& ev);

double sample_mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);  // n-1 denominator; 0 when n < 2

}  // namespace cyclebench
