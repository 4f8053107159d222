#include "cyclebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cyclebench {

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("sample_mean: empty series");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("sample_variance: empty series");
    if (v.size() < 2) return 0.0;
    const double m = sample_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

EvaluationSeries make_eval_series(const FeaturePanel& panel, const std::vector<int>& rows,
                                  const std::vector<double>& preds) {
    if (rows.size() != preds.size())
        throw std::invalid_argument("make_eval_series: rows and preds differ in length");
    EvaluationSeries ev;
    ev.dates.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const int r = rows[k];
        if (r < 0 || r >= panel.rows())
            throw std::invalid_argument("make_eval_series: row " + std::to_string(r) +
                                        " outside panel");
        if (k > 0 && r <= rows[k - 1])
            throw std::invalid_argument("make_eval_series: rows must be strictly increasing");
        ev.dates.push_back(panel.dates[static_cast<std::size_t>(r)]);
        ev.s_true.push_back(panel.target[static_cast<std::size_t>(r)]);
        ev.s_pred.push_back(preds[k]);
        if (panel.has_rf()) ev.rf.push_back(panel.rf[static_cast<std::size_t>(r)]);
        ev.recession.push_back(panel.recession[static_cast<std::size_t>(r)]);
    }
    ev.row_index = rows;
    return ev;
}

namespace {

bool regime_match(RegimeFilter f, std::uint8_t rec) {
    switch (f) {
        case RegimeFilter::all: return true;
        case RegimeFilter::recession: return rec != 0;
        case RegimeFilter::expansion: return rec == 0;
    }
    return false;
}

struct MeanSd {
    double mean, sd;
};

MeanSd fit_z(const std::vector<double>& y, const char* what) {
    if (y.size() < 2)
        throw std::runtime_error(std::string("normalized_mse: fewer than two rows in ") + what);
    const double m = sample_mean(y);
    const double var = sample_variance(y);
    if (var <= 0.0)
        throw std::runtime_error(std::string("normalized_mse: zero variance in ") + what);
    return {m, std::sqrt(var)};
}

}  // namespace

double normalized_mse(const EvaluationSeries& ev, RegimeFilter filter,
                      MseNormalizer normalizer) {
    std::vector<double> y, yhat, y_all;
    for (std::size_t t = 0; t < ev.size(); ++t) {
        if (!std::isfinite(ev.s_pred[t])) continue;
        y_all.push_back(ev.s_true[t]);
        if (!regime_match(filter, ev.recession[t])) continue;
        y.push_back(ev.s_true[t]);
        yhat.push_back(ev.s_pred[t]);
    }
    if (y.empty()) throw std::runtime_error("normalized_mse: empty regime slice");
    const MeanSd z = normalizer == MseNormalizer::shared ? fit_z(y_all, "the shared span")
                                                         : fit_z(y, "the regime slice");
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double d = (y[k] - z.mean) / z.sd - (yhat[k] - z.mean) / z.sd;
        s += d * d;
    }
    return s / static_cast<double>(y.size());
}

ErpSeries erp_series(const EvaluationSeries& ev, bool symmetrize_rf) {
    if (!ev.has_rf()) throw std::invalid_argument("erp_series: risk-free rates missing");
    if (ev.size() < 2) throw std::invalid_argument("erp_series: need at least two rows");
    const std::size_t n = ev.size();
    ErpSeries e;
    e.erp_true.assign(n, 0.0);
    e.erp_pred.assign(n, 0.0);
    e.hist_avg.assign(n, 0.0);
    e.valid.assign(n, 0);
    e.pred_valid.assign(n, 0);
    e.hist_valid.assign(n, 0);
    e.recession = ev.recession;
    double hist_sum = 0.0;
    std::size_t hist_n = 0;
    for (std::size_t t = 1; t < n; ++t) {
        if (hist_n > 0) {
            e.hist_avg[t] = hist_sum / static_cast<double>(hist_n);
            e.hist_valid[t] = 1;
        }
        if (!ev.contiguous_at(t)) continue;
        if (!(ev.s_true[t] > 0.0) || !(ev.s_true[t - 1] > 0.0))
            throw std::runtime_error("erp_series: non-positive price");
        const double ret = std::log(ev.s_true[t] / ev.s_true[t - 1]);
        e.erp_true[t] = ret - ev.rf[t];
        e.valid[t] = 1;
        if (std::isfinite(ev.s_pred[t])) {
            if (!(ev.s_pred[t] > 0.0))
                throw std::runtime_error("erp_series: non-positive predicted price");
            const double pret = std::log(ev.s_pred[t] / ev.s_true[t - 1]);
            e.erp_pred[t] = pret - (symmetrize_rf ? ev.rf[t] : ev.rf[t - 1]);
            e.pred_valid[t] = 1;
        }
        hist_sum += e.erp_true[t];
        ++hist_n;
    }
    return e;
}

double oos_r_squared(const ErpSeries& e, RegimeFilter filter) {
    double num = 0.0, den = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < e.erp_true.size(); ++t) {
        if (!e.pred_valid[t] || !e.hist_valid[t]) continue;
        if (!regime_match(filter, e.recession[t])) continue;
        const double eps = e.erp_true[t] - e.erp_pred[t];
        const double v = e.erp_true[t] - e.hist_avg[t];
        num += eps * eps;
        den += v * v;
        ++n;
    }
    if (n == 0) throw std::runtime_error("oos_r_squared: no usable entries");
    if (den <= 0.0) throw std::runtime_error("oos_r_squared: zero benchmark variance");
    return 1.0 - num / den;
}

double cerg(const CergInputs& c) {
    if (c.oos_pred_logreturns.empty() || c.pre_oos_logreturns.empty())
        throw std::invalid_argument("cerg: empty return series");
    if (!(c.gamma > 0.0)) throw std::invalid_argument("cerg: gamma must be positive");
    const double up = sample_mean(c.oos_pred_logreturns) -
                      0.5 * c.gamma * sample_variance(c.oos_pred_logreturns);
    const double ub = sample_mean(c.pre_oos_logreturns) -
                      0.5 * c.gamma * sample_variance(c.pre_oos_logreturns);
    return up - ub;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("pearson_correlation: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("pearson_correlation: need length >= 2");
    const double ma = sample_mean(a), mb = sample_mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw std::runtime_error("pearson_correlation: degenerate variance");
    return sab / std::sqrt(saa * sbb);
}

YearlyStats yearly_logreturn_stats(const EvaluationSeries& ev) {
    struct Acc {
        std::vector<double> realized;
        double se_sum = 0.0;
        int n = 0;
    };
    std::map<int, Acc> by_year;
    for (std::size_t t = 1; t < ev.size(); ++t) {
        if (!ev.contiguous_at(t)) continue;
        if (!std::isfinite(ev.s_pred[t])) continue;
        // a calendar hole of a full year or more breaks the return too
        if (ev.dates[t].year - ev.dates[t - 1].year >= 2) continue;
        const double realized = std::log(ev.s_true[t] / ev.s_true[t - 1]);
        const double predicted = std::log(ev.s_pred[t] / ev.s_true[t - 1]);
        Acc& acc = by_year[ev.dates[t].year];
        acc.realized.push_back(realized);
        acc.se_sum += (predicted - realized) * (predicted - realized);
        ++acc.n;
    }
    YearlyStats out;
    for (auto& [year, acc] : by_year) {
        if (acc.n < 2) {
            out.warnings.push_back("year " + std::to_string(year) + " omitted: only " +
                                   std::to_string(acc.n) + " log-return observation(s)");
            continue;
        }
        YearlyStat st;
        st.year = year;
        st.count = acc.n;
        st.logret_mse = acc.se_sum / static_cast<double>(acc.n);
        st.logret_sd = std::sqrt(sample_variance(acc.realized));
        out.years.push_back(st);
    }
    return out;
}

}  // namespace cyclebench
