#include "cyclebench/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "cyclebench/csv.hpp"

namespace cyclebench {

Normalizer fit_normalizer(const std::vector<double>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("fit_normalizer: need at least two values");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / (n - 1.0);
    if (var <= 0.0) throw std::runtime_error("fit_normalizer: zero variance");
    Normalizer z;
    z.mean = mean;
    z.sd = std::sqrt(var);
    return z;
}

std::vector<Window> make_windows(const FeaturePanel& panel, const std::vector<int>& rows,
                                 int lag) {
    if (lag < 1) throw std::invalid_argument("make_windows: lag must be >= 1");
    std::vector<Window> out;
    const std::size_t n = rows.size();
    std::size_t seg_start = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const int r = rows[k];
        if (r < 0 || r >= panel.rows())
            throw std::invalid_argument("make_windows: row " + std::to_string(r) +
                                        " outside panel");
        if (k > 0) {
            if (r <= rows[k - 1])
                throw std::invalid_argument("make_windows: rows must be strictly increasing");
            if (r != rows[k - 1] + 1) seg_start = k;  // new contiguous segment
        }
        if (k - seg_start >= static_cast<std::size_t>(lag)) {
            Window w;
            w.x = panel.features.middleRows(r - lag, lag);
            w.target = panel.target[static_cast<std::size_t>(r)];
            w.target_row = r;
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::vector<Normalizer> fit_feature_normalizers(const FeaturePanel& panel,
                                                const std::vector<int>& rows) {
    std::vector<Normalizer> out;
    for (Eigen::Index j = 0; j < panel.dim(); ++j) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (int r : rows) vals.push_back(panel.features(r, j));
        Normalizer z = fit_normalizer(vals);
        if (!rows.empty()) {
            z.fit_first = rows.front();
            z.fit_last = rows.back();
        }
        out.push_back(z);
    }
    return out;
}

Normalizer fit_target_normalizer(const FeaturePanel& panel, const std::vector<int>& rows) {
    std::vector<double> vals;
    vals.reserve(rows.size());
    for (int r : rows) vals.push_back(panel.target[static_cast<std::size_t>(r)]);
    Normalizer z = fit_normalizer(vals);
    if (!rows.empty()) {
        z.fit_first = rows.front();
        z.fit_last = rows.back();
    }
    return z;
}

std::vector<Window> normalize_windows(const std::vector<Window>& windows,
                                      const std::vector<Normalizer>& features,
                                      const Normalizer& target) {
    std::vector<Window> out;
    out.reserve(windows.size());
    for (const Window& w : windows) {
        if (w.x.cols() != static_cast<Eigen::Index>(features.size()))
            throw std::invalid_argument("normalize_windows: feature count mismatch");
        Window z = w;
        for (Eigen::Index j = 0; j < z.x.cols(); ++j)
            for (Eigen::Index t = 0; t < z.x.rows(); ++t)
                z.x(t, j) = features[static_cast<std::size_t>(j)].apply(w.x(t, j));
        z.target = target.apply(w.target);
        out.push_back(std::move(z));
    }
    return out;
}

namespace {

void add_scaled(ModelParams& dst, const ModelParams& src, double s) {
    auto d = tensor_refs(dst);
    auto q = tensor_refs(src);
    for (std::size_t k = 0; k < d.size(); ++k)
        for (Eigen::Index i = 0; i < d[k].size(); ++i) d[k].data[i] += s * q[k].data[i];
}

void scale_params(ModelParams& p, double s) {
    for (auto& r : tensor_refs(p))
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data[i] *= s;
}

double eval_mse(const std::vector<Window>& ws, const ModelParams& p) {
    double s = 0.0;
    for (const Window& w : ws) {
        const double e = model_forward(w.x, p) - w.target;
        s += e * e;
    }
    return s / static_cast<double>(ws.size());
}

void check_windows(const std::vector<Window>& ws, int lag, Eigen::Index d,
                   const char* which) {
    for (const Window& w : ws)
        if (w.x.rows() != lag || w.x.cols() != d)
            throw std::invalid_argument(std::string("train_model: ") + which +
                                        " window shape does not match hyper-parameters");
}

}  // namespace

TrainedModel train_model(ModelKind kind, const HyperParams& hyper,
                         const std::vector<Window>& train, const std::vector<Window>& val,
                         const TrainConfig& cfg, LstmHSource h_source) {
    if (train.empty() || val.empty())
        throw std::invalid_argument("train_model: empty window set");
    if (hyper.width < 1 || hyper.lag < 1)
        throw std::invalid_argument("train_model: bad hyper-parameters");
    const Eigen::Index d = train[0].x.cols();
    check_windows(train, hyper.lag, d, "train");
    check_windows(val, hyper.lag, d, "validation");
    if (cfg.batch < 1 || cfg.max_epochs < 0 || cfg.patience < 0)
        throw std::invalid_argument("train_model: bad training config");

    Rng rng(cfg.seed);
    ModelParams params = glorot_init(kind, hyper.width, static_cast<int>(d), rng, h_source);
    AdamState adam = make_adam_state(params);
    AdamConfig acfg;
    acfg.lr = cfg.lr;

    TrainedModel tm;
    tm.hyper = hyper;
    tm.seed = cfg.seed;
    tm.trace.push_back({eval_mse(train, params), eval_mse(val, params)});
    double best = tm.trace[0].val_mse;
    tm.best_epoch = 0;
    ModelParams best_params = params;
    // patience counts consecutive non-improving epochs; 0 still tolerates none
    const int stop_after = std::max(cfg.patience, 1);
    int streak = 0;

    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[rng.below(i + 1)]);
        double sq_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch));
            ModelParams gsum = zeros_like(params);
            for (std::size_t k = start; k < stop; ++k) {
                const Window& w = train[order[k]];
                BackwardResult res =
                    model_backward(w.x, w.target, params, true, &rng, cfg.dropout, 0.0);
                if (!std::isfinite(res.loss))
                    throw std::runtime_error("train_model: diverged at epoch " +
                                             std::to_string(epoch));
                sq_sum += res.loss;
                add_scaled(gsum, res.grads, 1.0);
            }
            scale_params(gsum, 1.0 / static_cast<double>(stop - start));
            if (cfg.l2 != 0.0) add_scaled(gsum, params, 2.0 * cfg.l2);
            adam_step(params, gsum, adam, acfg);
        }
        EpochStats st;
        st.train_mse = sq_sum / static_cast<double>(n);
        st.val_mse = eval_mse(val, params);
        if (!std::isfinite(st.val_mse))
            throw std::runtime_error("train_model: diverged at epoch " + std::to_string(epoch));
        tm.trace.push_back(st);
        if (st.val_mse < best) {
            best = st.val_mse;
            tm.best_epoch = epoch;
            best_params = params;
            streak = 0;
        } else if (++streak >= stop_after) {
            break;
        }
    }
    tm.params = std::move(best_params);
    return tm;
}

double predict_window(const TrainedModel& tm, const Window& raw) {
    Mat xz = raw.x;
    if (!tm.feature_norms.empty()) {
        if (xz.cols() != static_cast<Eigen::Index>(tm.feature_norms.size()))
            throw std::invalid_argument("predict_window: feature count mismatch");
        for (Eigen::Index j = 0; j < xz.cols(); ++j)
            for (Eigen::Index t = 0; t < xz.rows(); ++t)
                xz(t, j) = tm.feature_norms[static_cast<std::size_t>(j)].apply(raw.x(t, j));
    }
    return tm.target_norm.invert(model_forward(xz, tm.params));
}

GridResult grid_search(ModelKind kind, const GridSpec& grid, const GridData& data,
                       const TrainConfig& cfg, LstmHSource h_source, TrainFn trainer) {
    if (grid.widths.empty() || grid.lags.empty())
        throw std::invalid_argument("grid_search: empty grid");
    if (data.panel == nullptr) throw std::invalid_argument("grid_search: no panel");
    if (!trainer)
        trainer = [](ModelKind k, const HyperParams& hp, const std::vector<Window>& tr,
                     const std::vector<Window>& va, const TrainConfig& c, LstmHSource hs) {
            return train_model(k, hp, tr, va, c, hs);
        };

    std::vector<int> widths = grid.widths, lags = grid.lags;
    std::sort(widths.begin(), widths.end());
    std::sort(lags.begin(), lags.end());

    auto feature_norms = fit_feature_normalizers(*data.panel, data.train_rows);
    auto target_norm = fit_target_normalizer(*data.panel, data.train_rows);

    // Window sets depend only on the lag; share them across widths.
    std::map<int, std::pair<std::vector<Window>, std::vector<Window>>> by_lag;
    for (int l : lags) {
        auto tw = normalize_windows(make_windows(*data.panel, data.train_rows, l),
                                    feature_norms, target_norm);
        auto vw = normalize_windows(make_windows(*data.panel, data.val_rows, l),
                                    feature_norms, target_norm);
        by_lag[l] = {std::move(tw), std::move(vw)};
    }

    GridResult res;
    double best_val = std::numeric_limits<double>::infinity();
    bool have = false;
    std::uint64_t cell = 0;
    for (int w : widths) {
        for (int l : lags) {
            const HyperParams hp{w, l};
            const auto& [tw, vw] = by_lag[l];
            TrainConfig c2 = cfg;
            c2.seed = cfg.seed ^ cell;  // independent stream per grid point
            ++cell;
            const std::string tag = "(w=" + std::to_string(w) + ", l=" + std::to_string(l) + ")";
            if (tw.empty() || vw.empty()) {
                res.warnings.push_back(tag + " skipped: no windows at this lag");
                continue;
            }
            TrainedModel tm;
            try {
                tm = trainer(kind, hp, tw, vw, c2, h_source);
            } catch (const std::exception& e) {
                res.warnings.push_back(tag + " skipped: " + e.what());
                continue;
            }
            const double v = tm.best_val_mse();
            // strict < with ascending iteration implements the smaller-w,
            // smaller-l tie-break
            if (v < best_val) {
                best_val = v;
                res.model = std::move(tm);
                have = true;
            }
        }
    }
    if (!have) throw std::runtime_error("grid_search: all grid cells failed");
    res.model.feature_norms = std::move(feature_norms);
    res.model.target_norm = target_norm;
    return res;
}

void write_trace_csv(const std::string& path, const TrainedModel& tm) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < tm.trace.size(); ++e)
        out << e << ',' << csv::format_double(tm.trace[e].train_mse) << ','
            << csv::format_double(tm.trace[e].val_mse) << "\n";
    if (!out) throw std::runtime_error("write failure on trace: " + path);
}

}  // namespace cyclebench
