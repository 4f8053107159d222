#include "cyclebench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "cyclebench/checkpoint.hpp"
#include "cyclebench/csv.hpp"
#include "cyclebench/gbm.hpp"

namespace fs = std::filesystem;

namespace cyclebench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool regime_match(RegimeFilter f, std::uint8_t rec) {
    switch (f) {
        case RegimeFilter::all: return true;
        case RegimeFilter::recession: return rec != 0;
        case RegimeFilter::expansion: return rec == 0;
    }
    return false;
}

const char* regime_name(RegimeFilter f) {
    switch (f) {
        case RegimeFilter::all: return "all";
        case RegimeFilter::recession: return "recession";
        case RegimeFilter::expansion: return "expansion";
    }
    return "?";
}

double parse_num(const std::string& tok, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error(where + ": bad number '" + tok + "'");
    return v;
}

double median_of(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }),
            v.end());
    if (v.empty()) return kNaN;
    const std::size_t mid = (v.size() - 1) / 2;  // lower median
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    return v[mid];
}

}  // namespace

std::string to_string(FeatureVariant v) {
    return v == FeatureVariant::base ? "base" : "rf";
}

std::vector<CellSpec> plan_cells(int n_subperiods, const ExperimentConfig& cfg) {
    if (n_subperiods < 1) throw std::invalid_argument("plan_cells: no sub-periods");
    std::vector<FeatureVariant> features{FeatureVariant::base};
    if (cfg.use_rf) features.push_back(FeatureVariant::rf);
    std::vector<CellSpec> cells;
    std::uint64_t index = 0;
    for (int sp = 0; sp < n_subperiods; ++sp)
        for (ModelKind k : cfg.kinds)
            for (TrainVariant tv : cfg.variants)
                for (FeatureVariant fv : features)
                    cells.push_back({sp, k, tv, fv, index++});
    return cells;
}

namespace {

// Everything a cell needs, loaded once and shared read-only by workers.
struct Bundle {
    FeaturePanel base;
    FeaturePanel with_rf;  // populated only when cfg.use_rf
    std::vector<SubPeriod> subperiods;
    std::vector<SplitSet> splits;

    const FeaturePanel& panel(FeatureVariant v) const {
        return v == FeatureVariant::rf ? with_rf : base;
    }
};

Bundle load_bundle(const ExperimentConfig& cfg) {
    Bundle b;
    const PriceSeries prices = load_price_csv(cfg.prices_path);
    const FactorPanel factors = load_factor_csv(cfg.factors_path, cfg.factors_percent);
    const RecessionCalendar calendar = load_recession_calendar(cfg.recessions_path);
    b.base = align_panel(prices, factors, calendar, false);
    if (cfg.use_rf) {
        b.with_rf = align_panel(prices, factors, calendar, true);
        if (b.with_rf.rows() != b.base.rows())
            throw std::runtime_error("feature variants disagree on panel rows");
    }
    b.subperiods = build_subperiods(b.base, calendar);
    for (const SubPeriod& sp : b.subperiods) b.splits.push_back(split_subperiod(b.base, sp));
    return b;
}

// Evaluation-time windows read the lag rows immediately preceding the target
// in the panel; unlike training windows they may reach outside the row set,
// since past market data is always observable at forecast time.
std::vector<std::pair<int, double>> predict_rows(const FeaturePanel& panel,
                                                 const TrainedModel& tm,
                                                 const std::vector<int>& targets) {
    std::vector<std::pair<int, double>> out;
    for (int r : targets) {
        if (r < tm.hyper.lag) continue;
        Window w;
        w.x = panel.features.middleRows(r - tm.hyper.lag, tm.hyper.lag);
        w.target = panel.target[static_cast<std::size_t>(r)];
        w.target_row = r;
        out.emplace_back(r, predict_window(tm, w));
    }
    return out;
}

RegimeMetrics eval_regime(const EvaluationSeries& ev, int oos_first_row, RegimeFilter f,
                          std::vector<std::string>& warnings) {
    RegimeMetrics m{kNaN, kNaN, kNaN};
    const std::string tag = regime_name(f);
    try {
        m.mse = normalized_mse(ev, f);
    } catch (const std::exception& e) {
        warnings.push_back(tag + " mse unavailable: " + e.what());
    }
    if (ev.has_rf()) {
        try {
            m.r2 = oos_r_squared(erp_series(ev), f);
        } catch (const std::exception& e) {
            warnings.push_back(tag + " r2 unavailable: " + e.what());
        }
    } else {
        warnings.push_back(tag + " r2 unavailable: no risk-free rates");
    }
    try {
        CergInputs ci;
        for (std::size_t t = 1; t < ev.size(); ++t) {
            if (!ev.contiguous_at(t)) continue;
            const double ret = std::log(ev.s_true[t] / ev.s_true[t - 1]);
            if (ev.row_index[t] < oos_first_row) ci.pre_oos_logreturns.push_back(ret);
            if (std::isfinite(ev.s_pred[t]) && regime_match(f, ev.recession[t]))
                ci.oos_pred_logreturns.push_back(std::log(ev.s_pred[t] / ev.s_true[t - 1]));
        }
        m.cerg_gain = cerg(ci);
    } catch (const std::exception& e) {
        warnings.push_back(tag + " cerg unavailable: " + e.what());
    }
    return m;
}

std::string cell_stem(const CellResult& res) {
    return res.label + "_" + to_string(res.spec.kind) + "_" + std::to_string(res.width) +
           "_" + std::to_string(res.lag) + "_" + to_string(res.spec.trainset);
}

fs::path variant_dir(const std::string& out_dir, FeatureVariant v) {
    return fs::path(out_dir) / to_string(v);
}

fs::path done_path(const std::string& out_dir, const CellSpec& spec,
                   const std::string& label) {
    return variant_dir(out_dir, spec.features) /
           (label + "_" + to_string(spec.kind) + "_" + to_string(spec.trainset) + ".done");
}

void write_done(const fs::path& path, const CellResult& res) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << "cyclebench-cell v1\n";
        out << "label " << res.label << "\n";
        out << "kind " << to_string(res.spec.kind) << "\n";
        out << "trainset " << to_string(res.spec.trainset) << "\n";
        out << "features " << to_string(res.spec.features) << "\n";
        out << "width " << res.width << "\n";
        out << "lag " << res.lag << "\n";
        auto emit = [&out](const char* name, const RegimeMetrics& m) {
            out << name << ' ' << csv::format_double(m.mse) << ' ' << csv::format_double(m.r2) << ' '
                << csv::format_double(m.cerg_gain) << "\n";
        };
        emit("all", res.all);
        emit("recession", res.recession);
        emit("expansion", res.expansion);
        out << "yearly " << res.yearly.years.size() << "\n";
        for (const YearlyStat& y : res.yearly.years)
            out << y.year << ' ' << y.count << ' ' << csv::format_double(y.logret_mse) << ' '
                << csv::format_double(y.logret_sd) << "\n";
        out << "warnings " << res.warnings.size() << "\n";
        for (const std::string& w : res.warnings) out << w << "\n";
        if (!out) throw std::runtime_error("write failure on " + tmp.string());
    }
    fs::rename(tmp, path);
}

CellResult load_done(const fs::path& path, const CellSpec& spec, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::string where = path.string();
    std::string line;
    auto next = [&](const std::string& key) {
        if (!std::getline(in, line)) throw std::runtime_error(where + ": truncated");
        const auto sp = line.find(' ');
        const std::string k = sp == std::string::npos ? line : line.substr(0, sp);
        if (k != key) throw std::runtime_error(where + ": expected '" + key + "'");
        return sp == std::string::npos ? std::string() : line.substr(sp + 1);
    };
    if (!std::getline(in, line) || line != "cyclebench-cell v1")
        throw std::runtime_error(where + ": bad magic");
    CellResult res;
    res.spec = spec;
    res.label = next("label");
    if (res.label != label) throw std::runtime_error(where + ": label mismatch");
    if (next("kind") != to_string(spec.kind)) throw std::runtime_error(where + ": kind mismatch");
    if (next("trainset") != to_string(spec.trainset))
        throw std::runtime_error(where + ": trainset mismatch");
    if (next("features") != to_string(spec.features))
        throw std::runtime_error(where + ": features mismatch");
    res.width = static_cast<int>(parse_num(next("width"), where));
    res.lag = static_cast<int>(parse_num(next("lag"), where));
    auto read_metrics = [&](const char* key) {
        std::istringstream iss(next(key));
        std::string a, b, c;
        if (!(iss >> a >> b >> c)) throw std::runtime_error(where + ": short metrics row");
        return RegimeMetrics{parse_num(a, where), parse_num(b, where), parse_num(c, where)};
    };
    res.all = read_metrics("all");
    res.recession = read_metrics("recession");
    res.expansion = read_metrics("expansion");
    const int ny = static_cast<int>(parse_num(next("yearly"), where));
    for (int k = 0; k < ny; ++k) {
        if (!std::getline(in, line)) throw std::runtime_error(where + ": truncated yearly");
        std::istringstream iss(line);
        std::string a, b, c, d;
        if (!(iss >> a >> b >> c >> d)) throw std::runtime_error(where + ": short yearly row");
        YearlyStat y;
        y.year = static_cast<int>(parse_num(a, where));
        y.count = static_cast<int>(parse_num(b, where));
        y.logret_mse = parse_num(c, where);
        y.logret_sd = parse_num(d, where);
        res.yearly.years.push_back(y);
    }
    const int nw = static_cast<int>(parse_num(next("warnings"), where));
    for (int k = 0; k < nw; ++k) {
        if (!std::getline(in, line)) throw std::runtime_error(where + ": truncated warnings");
        res.warnings.push_back(line);
    }
    return res;
}

CellResult compute_cell(const Bundle& bundle, const CellSpec& spec,
                        const ExperimentConfig& cfg) {
    CellResult res;
    res.spec = spec;
    const SubPeriod& sp = bundle.subperiods[static_cast<std::size_t>(spec.subperiod)];
    const SplitSet& split = bundle.splits[static_cast<std::size_t>(spec.subperiod)];
    res.label = sp.label;
    const FeaturePanel& panel = bundle.panel(spec.features);

    GridData gd;
    gd.panel = &panel;
    gd.train_rows = spec.trainset == TrainVariant::iswor ? split.iswor : split.iswr;
    gd.val_rows = split.validation;
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed ^ spec.index;  // each cell draws its own stream
    GridResult gr = grid_search(spec.kind, cfg.grid, gd, tc, cfg.lstm_h_source);
    res.warnings = gr.warnings;
    res.width = gr.model.hyper.width;
    res.lag = gr.model.hyper.lag;

    const fs::path dir = variant_dir(cfg.out_dir, spec.features);
    CheckpointMeta meta;
    meta.lag = gr.model.hyper.lag;
    meta.seed = gr.model.seed;
    meta.feature_names = panel.feature_names;
    for (const Normalizer& z : gr.model.feature_norms) {
        meta.feature_mean.push_back(z.mean);
        meta.feature_sd.push_back(z.sd);
    }
    meta.target_mean = gr.model.target_norm.mean;
    meta.target_sd = gr.model.target_norm.sd;
    save_checkpoint((dir / (cell_stem(res) + ".ckpt")).string(), gr.model.params, meta);
    write_trace_csv((dir / (cell_stem(res) + ".trace.csv")).string(), gr.model);

    std::vector<int> span;
    for (int r = sp.first_row; r <= sp.last_row; ++r) span.push_back(r);
    std::vector<double> preds(span.size(), kNaN);
    for (const auto& [row, value] : predict_rows(panel, gr.model, split.oos))
        preds[static_cast<std::size_t>(row - sp.first_row)] = value;
    const EvaluationSeries ev = make_eval_series(panel, span, preds);

    const int oos_first = split.oos.front();
    res.all = eval_regime(ev, oos_first, RegimeFilter::all, res.warnings);
    res.recession = eval_regime(ev, oos_first, RegimeFilter::recession, res.warnings);
    res.expansion = eval_regime(ev, oos_first, RegimeFilter::expansion, res.warnings);
    res.yearly = yearly_logreturn_stats(ev);
    for (const std::string& w : res.yearly.warnings) res.warnings.push_back(w);
    return res;
}

void append_report_rows(std::vector<ReportRow>& rows, const CellResult& res) {
    auto one = [&](const char* regime, const RegimeMetrics& m) {
        rows.push_back({res.label, to_string(res.spec.kind), to_string(res.spec.trainset),
                        to_string(res.spec.features), regime, m.mse, m.r2, m.cerg_gain});
    };
    one("all", res.all);
    one("recession", res.recession);
    one("expansion", res.expansion);
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, bool force, int jobs,
                          std::ostream* log) {
    Bundle bundle = load_bundle(cfg);
    fs::create_directories(cfg.out_dir);
    fs::create_directories(variant_dir(cfg.out_dir, FeatureVariant::base));
    if (cfg.use_rf) fs::create_directories(variant_dir(cfg.out_dir, FeatureVariant::rf));

    {
        std::vector<std::pair<SubPeriod, SplitSet>> pairs;
        for (std::size_t i = 0; i < bundle.subperiods.size(); ++i)
            pairs.emplace_back(bundle.subperiods[i], bundle.splits[i]);
        write_splits_json((fs::path(cfg.out_dir) / "splits.json").string(), pairs);
    }

    const std::vector<CellSpec> cells =
        plan_cells(static_cast<int>(bundle.subperiods.size()), cfg);
    RunSummary summary;
    summary.out_dir = cfg.out_dir;
    summary.results.resize(cells.size());
    std::vector<int> skipped(cells.size(), 0);

    std::atomic<std::size_t> cursor{0};
    std::atomic<int> done_count{0};
    std::mutex log_mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cells.size()) break;
            const CellSpec& spec = cells[i];
            const std::string label =
                bundle.subperiods[static_cast<std::size_t>(spec.subperiod)].label;
            CellResult res;
            const fs::path done = done_path(cfg.out_dir, spec, label);
            bool reused = false;
            if (!force && fs::exists(done)) {
                try {
                    res = load_done(done, spec, label);
                    reused = true;
                } catch (const std::exception&) {
                    reused = false;  // stale or damaged; recompute below
                }
            }
            if (!reused) {
                try {
                    res = compute_cell(bundle, spec, cfg);
                    write_done(done, res);
                } catch (const std::exception& e) {
                    res.spec = spec;
                    res.label = label;
                    res.failed = true;
                    res.error = e.what();
                }
            }
            skipped[i] = reused ? 1 : 0;
            summary.results[i] = std::move(res);
            const int n = ++done_count;
            if (log) {
                std::lock_guard<std::mutex> lock(log_mu);
                const CellResult& r = summary.results[i];
                *log << "[" << n << "/" << cells.size() << "] " << label << ' '
                     << to_string(spec.kind) << ' ' << to_string(spec.trainset) << ' '
                     << to_string(spec.features);
                if (r.failed)
                    *log << " FAILED: " << r.error;
                else
                    *log << (reused ? " (cached)" : "") << " mse_all="
                         << csv::format_double(r.all.mse);
                *log << std::endl;
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> threads;
    for (int t = 1; t < n_workers; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    std::vector<ReportRow> rows;
    std::vector<std::string> yearly_lines;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellResult& res = summary.results[i];
        if (res.failed) {
            ++summary.failed;
            continue;
        }
        if (skipped[i])
            ++summary.skipped_existing;
        else
            ++summary.completed;
        append_report_rows(rows, res);
        for (const YearlyStat& y : res.yearly.years) {
            yearly_lines.push_back(res.label + "," + to_string(res.spec.kind) + "," +
                                   to_string(res.spec.trainset) + "," +
                                   to_string(res.spec.features) + "," +
                                   std::to_string(y.year) + "," + std::to_string(y.count) +
                                   "," + csv::format_double(y.logret_mse) + "," +
                                   csv::format_double(y.logret_sd));
        }
    }
    write_reports_csv((fs::path(cfg.out_dir) / "reports.csv").string(), rows);
    {
        const std::string path = (fs::path(cfg.out_dir) / "yearly.csv").string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << "subperiod,model,trainset,features,year,count,logret_mse,logret_sd\n";
        for (const std::string& l : yearly_lines) out << l << "\n";
    }
    return summary;
}

std::vector<ReportRow> read_reports_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    for (const char* col : {"subperiod", "model", "trainset", "features", "regime", "mse",
                            "r2", "cerg"})
        if (csv::column_index(t, col) < 0)
            throw std::runtime_error(path + ": missing column " + col);
    const int c_sp = csv::column_index(t, "subperiod");
    const int c_model = csv::column_index(t, "model");
    const int c_ts = csv::column_index(t, "trainset");
    const int c_fv = csv::column_index(t, "features");
    const int c_rg = csv::column_index(t, "regime");
    const int c_mse = csv::column_index(t, "mse");
    const int c_r2 = csv::column_index(t, "r2");
    const int c_cg = csv::column_index(t, "cerg");
    std::vector<ReportRow> rows;
    for (const auto& r : t.rows) {
        ReportRow row;
        row.subperiod = r[static_cast<std::size_t>(c_sp)];
        row.model = r[static_cast<std::size_t>(c_model)];
        row.trainset = r[static_cast<std::size_t>(c_ts)];
        row.features = r[static_cast<std::size_t>(c_fv)];
        row.regime = r[static_cast<std::size_t>(c_rg)];
        row.mse = parse_num(r[static_cast<std::size_t>(c_mse)], path);
        row.r2 = parse_num(r[static_cast<std::size_t>(c_r2)], path);
        row.cerg_gain = parse_num(r[static_cast<std::size_t>(c_cg)], path);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_reports_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "subperiod,model,trainset,features,regime,mse,r2,cerg\n";
    for (const ReportRow& r : rows)
        out << r.subperiod << ',' << r.model << ',' << r.trainset << ',' << r.features << ','
            << r.regime << ',' << csv::format_double(r.mse) << ',' << csv::format_double(r.r2) << ','
            << csv::format_double(r.cerg_gain) << "\n";
    if (!out) throw std::runtime_error("write failure on " + path);
}

ComparisonKind comparison_from_string(const std::string& s) {
    if (s == "rt-vs-nrt") return ComparisonKind::rt_vs_nrt;
    if (s == "rf-vs-norf") return ComparisonKind::rf_vs_norf;
    if (s == "recession-vs-expansion") return ComparisonKind::recession_vs_expansion;
    throw std::invalid_argument(
        "unknown comparison '" + s +
        "' (expected rt-vs-nrt, rf-vs-norf or recession-vs-expansion)");
}

namespace {

struct RowKey {
    std::string subperiod, model, trainset, features, regime;
    bool operator<(const RowKey& o) const {
        return std::tie(subperiod, model, trainset, features, regime) <
               std::tie(o.subperiod, o.model, o.trainset, o.features, o.regime);
    }
};

using RowMap = std::map<RowKey, const ReportRow*>;

RowMap index_rows(const std::vector<ReportRow>& rows) {
    RowMap m;
    for (const ReportRow& r : rows)
        m[{r.subperiod, r.model, r.trainset, r.features, r.regime}] = &r;
    return m;
}

const ReportRow* find_row(const RowMap& m, const std::string& sp, const std::string& model,
                          const std::string& ts, const std::string& fv,
                          const std::string& rg) {
    auto it = m.find({sp, model, ts, fv, rg});
    return it == m.end() ? nullptr : it->second;
}

std::string fmt_cell(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void table_header(std::ostringstream& os, const std::vector<std::string>& cols) {
    for (const std::string& c : cols) os << c << "  ";
    os << "\n";
    std::size_t total = 0;
    for (const std::string& c : cols) total += c.size() + 2;
    os << std::string(total, '-') << "\n";
}

struct FlagStat {
    int hits = 0, total = 0;
    // strict inequality; ties and NaNs do not count as better
    std::string record(double a, double b, bool a_better_is_greater) {
        if (!std::isfinite(a) || !std::isfinite(b)) return "  -";
        ++total;
        const bool flag = a_better_is_greater ? a > b : a < b;
        if (flag) ++hits;
        return flag ? "yes" : " no";
    }
};

}  // namespace

ComparisonReport emit_comparison_report(const std::vector<ReportRow>& rows,
                                        ComparisonKind kind) {
    ComparisonReport rep;
    const RowMap m = index_rows(rows);

    std::set<std::string> subperiods, models, trainsets, features;
    for (const ReportRow& r : rows) {
        subperiods.insert(r.subperiod);
        models.insert(r.model);
        trainsets.insert(r.trainset);
        features.insert(r.features);
    }
    std::ostringstream os;

    if (kind == ComparisonKind::recession_vs_expansion) {
        os << "Recession vs expansion out-of-sample metrics\n\n";
        table_header(os, {"subperiod", "model   ", "trainset", "features", "rec_mse   ",
                          "exp_mse   ", "mse_rec>exp", "rec_r2    ", "exp_r2    ",
                          "r2_rec<exp", "rec_cerg  ", "exp_cerg  ", "cerg_rec<exp"});
        FlagStat mse_st, r2_st, cerg_st;
        for (const auto& sp : subperiods)
            for (const auto& mo : models)
                for (const auto& ts : trainsets)
                    for (const auto& fv : features) {
                        const ReportRow* rec = find_row(m, sp, mo, ts, fv, "recession");
                        const ReportRow* exp = find_row(m, sp, mo, ts, fv, "expansion");
                        if (!rec && !exp) continue;
                        if (!rec || !exp) {
                            rep.warnings.push_back("missing regime counterpart for " + sp +
                                                   " " + mo + " " + ts + " " + fv);
                            continue;
                        }
                        char line[320];
                        const std::string f1 = mse_st.record(rec->mse, exp->mse, true);
                        const std::string f2 = r2_st.record(rec->r2, exp->r2, false);
                        const std::string f3 =
                            cerg_st.record(rec->cerg_gain, exp->cerg_gain, false);
                        std::snprintf(line, sizeof(line),
                                      "%-9s  %-8s  %-8s  %-8s  %-10s  %-10s  %-11s  %-10s  "
                                      "%-10s  %-10s  %-10s  %-10s  %s\n",
                                      sp.c_str(), mo.c_str(), ts.c_str(), fv.c_str(),
                                      fmt_cell(rec->mse).c_str(), fmt_cell(exp->mse).c_str(),
                                      f1.c_str(), fmt_cell(rec->r2).c_str(),
                                      fmt_cell(exp->r2).c_str(), f2.c_str(),
                                      fmt_cell(rec->cerg_gain).c_str(),
                                      fmt_cell(exp->cerg_gain).c_str(), f3.c_str());
                        os << line;
                    }
        rep.counts.push_back({"recession MSE > expansion MSE", mse_st.hits, mse_st.total});
        rep.counts.push_back({"recession R2 < expansion R2", r2_st.hits, r2_st.total});
        rep.counts.push_back({"recession CERG < expansion CERG", cerg_st.hits, cerg_st.total});
    } else {
        // Two-variant comparisons share a skeleton: A is the baseline column,
        // B the treatment, flags follow each metric's direction.
        const bool rt = kind == ComparisonKind::rt_vs_nrt;
        const std::string what_a = rt ? "nrt" : "norf";
        const std::string what_b = rt ? "rt" : "rf";
        os << (rt ? "Recession-trained (rt) vs non-recession-trained (nrt)\n\n"
                  : "Risk-free-feature (rf) vs without (norf)\n\n");
        FlagStat rec_mse_st, exp_mse_st, r2_st, cerg_st;
        table_header(os, {"subperiod", "model   ", "group   ",
                          what_a + "_rec_mse", what_b + "_rec_mse", "mse_" + what_a + ">" + what_b,
                          what_a + "_exp_mse", what_b + "_exp_mse", "exp_" + what_a + ">" + what_b,
                          what_a + "_r2   ", what_b + "_r2   ", "r2_" + what_b + ">" + what_a,
                          what_a + "_cerg ", what_b + "_cerg ", "cerg_" + what_b + ">" + what_a});
        // the "group" column carries the held-fixed third axis
        const std::set<std::string>& held = rt ? features : trainsets;
        for (const auto& sp : subperiods)
            for (const auto& mo : models)
                for (const auto& hv : held) {
                    auto pick = [&](const char* variant, const char* regime) {
                        return rt ? find_row(m, sp, mo, variant, hv, regime)
                                  : find_row(m, sp, mo, hv, variant, regime);
                    };
                    const char* va = rt ? "iswor" : "base";
                    const char* vb = rt ? "iswr" : "rf";
                    const ReportRow* a_rec = pick(va, "recession");
                    const ReportRow* b_rec = pick(vb, "recession");
                    const ReportRow* a_exp = pick(va, "expansion");
                    const ReportRow* b_exp = pick(vb, "expansion");
                    const ReportRow* a_all = pick(va, "all");
                    const ReportRow* b_all = pick(vb, "all");
                    const bool any = a_rec || b_rec || a_all || b_all;
                    if (!any) continue;
                    if (!a_rec || !b_rec || !a_exp || !b_exp || !a_all || !b_all) {
                        rep.warnings.push_back("missing counterpart cell for " + sp + " " +
                                               mo + " " + hv);
                        continue;
                    }
                    const std::string f1 = rec_mse_st.record(a_rec->mse, b_rec->mse, true);
                    const std::string f2 = exp_mse_st.record(a_exp->mse, b_exp->mse, true);
                    const std::string f3 = r2_st.record(b_all->r2, a_all->r2, true);
                    const std::string f4 =
                        cerg_st.record(b_all->cerg_gain, a_all->cerg_gain, true);
                    char line[400];
                    std::snprintf(line, sizeof(line),
                                  "%-9s  %-8s  %-8s  %-12s  %-12s  %-14s  %-12s  %-12s  "
                                  "%-14s  %-9s  %-9s  %-12s  %-9s  %-9s  %s\n",
                                  sp.c_str(), mo.c_str(), hv.c_str(),
                                  fmt_cell(a_rec->mse).c_str(), fmt_cell(b_rec->mse).c_str(),
                                  f1.c_str(), fmt_cell(a_exp->mse).c_str(),
                                  fmt_cell(b_exp->mse).c_str(), f2.c_str(),
                                  fmt_cell(a_all->r2).c_str(), fmt_cell(b_all->r2).c_str(),
                                  f3.c_str(), fmt_cell(a_all->cerg_gain).c_str(),
                                  fmt_cell(b_all->cerg_gain).c_str(), f4.c_str());
                    os << line;
                }
        const std::string A = rt ? "NRT" : "no-rf";
        const std::string B = rt ? "RT" : "rf";
        rep.counts.push_back({"recession MSE: " + A + " > " + B, rec_mse_st.hits, rec_mse_st.total});
        rep.counts.push_back({"expansion MSE: " + A + " > " + B, exp_mse_st.hits, exp_mse_st.total});
        rep.counts.push_back({"overall R2: " + B + " > " + A, r2_st.hits, r2_st.total});
        rep.counts.push_back({"overall CERG: " + B + " > " + A, cerg_st.hits, cerg_st.total});
    }

    os << "\n";
    for (const ComparisonCount& c : rep.counts)
        os << c.what << ": " << c.hits << " of " << c.total << "\n";
    for (const std::string& w : rep.warnings) os << "warning: " << w << "\n";
    rep.text = os.str();
    return rep;
}

GbmRunResult run_gbm_experiment(const ExperimentConfig& cfg, const GbmRunOptions& opt) {
    if (opt.seeds < 1) throw std::invalid_argument("run_gbm_experiment: seeds must be >= 1");
    ExperimentConfig base_cfg = cfg;
    base_cfg.use_rf = false;  // the baseline consumes prices only
    Bundle bundle = load_bundle(base_cfg);
    const FeaturePanel& panel = bundle.base;
    const std::size_t n_sp = bundle.subperiods.size();

    struct SeedStats {
        std::vector<double> mse_all, mse_rec, mse_exp, r2_all, cerg_all;
        std::vector<double> ret_mse_rec, ret_mse_exp;  // return-scored
    };
    std::vector<SeedStats> stats(n_sp);
    std::vector<double> fractions;

    for (int s = 0; s < opt.seeds; ++s) {
        int rec_gt = 0, comparable = 0;
        for (std::size_t i = 0; i < n_sp; ++i) {
            const SubPeriod& sp = bundle.subperiods[i];
            const SplitSet& split = bundle.splits[i];
            const std::vector<int>& train_rows =
                opt.trainset == TrainVariant::iswor ? split.iswor : split.iswr;
            std::vector<double> train_returns;
            for (std::size_t k = 1; k < train_rows.size(); ++k)
                if (train_rows[k] == train_rows[k - 1] + 1)
                    train_returns.push_back(
                        std::log(panel.target[static_cast<std::size_t>(train_rows[k])] /
                                 panel.target[static_cast<std::size_t>(train_rows[k - 1])]));
            const GbmParams gp = fit_gbm(train_returns);

            std::vector<int> targets;
            for (int r : split.oos)
                if (r >= 1) targets.push_back(r);
            const std::uint64_t seed =
                cfg.train.seed + 1000003ULL * static_cast<std::uint64_t>(i) +
                static_cast<std::uint64_t>(s);
            const std::vector<double> sims =
                simulate_logreturns(targets.size(), gp, seed, opt.strict_mean);

            std::vector<int> span;
            for (int r = sp.first_row; r <= sp.last_row; ++r) span.push_back(r);
            std::vector<double> preds(span.size(), kNaN);
            double se_rec = 0, se_exp = 0;
            int n_rec = 0, n_exp = 0;
            for (std::size_t k = 0; k < targets.size(); ++k) {
                const int r = targets[k];
                const double prev = panel.target[static_cast<std::size_t>(r - 1)];
                preds[static_cast<std::size_t>(r - sp.first_row)] = prev * std::exp(sims[k]);
                const double realized =
                    std::log(panel.target[static_cast<std::size_t>(r)] / prev);
                const double d = sims[k] - realized;
                if (panel.recession[static_cast<std::size_t>(r)]) {
                    se_rec += d * d;
                    ++n_rec;
                } else {
                    se_exp += d * d;
                    ++n_exp;
                }
            }
            const EvaluationSeries ev = make_eval_series(panel, span, preds);
            std::vector<std::string> sink;
            const RegimeMetrics all = eval_regime(ev, split.oos.front(), RegimeFilter::all, sink);
            const RegimeMetrics rec =
                eval_regime(ev, split.oos.front(), RegimeFilter::recession, sink);
            const RegimeMetrics exp =
                eval_regime(ev, split.oos.front(), RegimeFilter::expansion, sink);
            stats[i].mse_all.push_back(all.mse);
            stats[i].mse_rec.push_back(rec.mse);
            stats[i].mse_exp.push_back(exp.mse);
            stats[i].r2_all.push_back(all.r2);
            stats[i].cerg_all.push_back(all.cerg_gain);
            if (n_rec > 0) stats[i].ret_mse_rec.push_back(se_rec / n_rec);
            if (n_exp > 0) stats[i].ret_mse_exp.push_back(se_exp / n_exp);
            if (std::isfinite(rec.mse) && std::isfinite(exp.mse)) {
                ++comparable;
                if (rec.mse > exp.mse) ++rec_gt;
            }
        }
        if (comparable > 0)
            fractions.push_back(static_cast<double>(rec_gt) / comparable);
    }

    GbmRunResult out;
    out.fraction_rec_gt_exp =
        fractions.empty() ? kNaN : sample_mean(fractions);
    std::ostringstream os;
    os << "GBM baseline over " << opt.seeds << " seeds (per-sub-period medians)\n\n";
    os << "subperiod  mse_all    mse_rec    mse_exp    ret_mse_rec  ret_mse_exp  r2_all     cerg_all\n";
    os << "-----------------------------------------------------------------------------------------\n";
    for (std::size_t i = 0; i < n_sp; ++i) {
        const std::string& label = bundle.subperiods[i].label;
        const double m_all = median_of(stats[i].mse_all);
        const double m_rec = median_of(stats[i].mse_rec);
        const double m_exp = median_of(stats[i].mse_exp);
        const double r_rec = median_of(stats[i].ret_mse_rec);
        const double r_exp = median_of(stats[i].ret_mse_exp);
        const double r2 = median_of(stats[i].r2_all);
        const double cg = median_of(stats[i].cerg_all);
        char line[220];
        std::snprintf(line, sizeof(line),
                      "%-9s  %-9s  %-9s  %-9s  %-11s  %-11s  %-9s  %s\n", label.c_str(),
                      fmt_cell(m_all).c_str(), fmt_cell(m_rec).c_str(),
                      fmt_cell(m_exp).c_str(), fmt_cell(r_rec).c_str(),
                      fmt_cell(r_exp).c_str(), fmt_cell(r2).c_str(), fmt_cell(cg).c_str());
        os << line;
        out.rows.push_back({label, "gbm", to_string(opt.trainset), "base", "all", m_all, r2, cg});
        out.rows.push_back({label, "gbm", to_string(opt.trainset), "base", "recession", m_rec,
                            kNaN, kNaN});
        out.rows.push_back({label, "gbm", to_string(opt.trainset), "base", "expansion", m_exp,
                            kNaN, kNaN});
    }
    os << "\nmean fraction of sub-periods with recession MSE > expansion MSE: "
       << fmt_cell(out.fraction_rec_gt_exp) << "\n";
    out.text = os.str();
    return out;
}

IndexSeries index_from_checkpoint(const ExperimentConfig& cfg, const std::string& ckpt_path,
                                  int window) {
    const Checkpoint ck = load_checkpoint(ckpt_path);
    bool wants_rf = false;
    for (const std::string& n : ck.meta.feature_names)
        if (n == "rf") wants_rf = true;

    const PriceSeries prices = load_price_csv(cfg.prices_path);
    const FactorPanel factors = load_factor_csv(cfg.factors_path, cfg.factors_percent);
    const RecessionCalendar calendar = load_recession_calendar(cfg.recessions_path);
    const FeaturePanel panel = align_panel(prices, factors, calendar, wants_rf);
    if (panel.dim() != ck.params.input_dim)
        throw std::runtime_error("checkpoint expects " + std::to_string(ck.params.input_dim) +
                                 " features but the panel has " + std::to_string(panel.dim()));
    if (ck.meta.feature_mean.size() != static_cast<std::size_t>(panel.dim()) ||
        ck.meta.feature_sd.size() != ck.meta.feature_mean.size())
        throw std::runtime_error("checkpoint normalizer size mismatch");

    TrainedModel tm;
    tm.params = ck.params;
    tm.hyper.width = ck.params.width;
    tm.hyper.lag = ck.meta.lag;
    for (std::size_t j = 0; j < ck.meta.feature_mean.size(); ++j) {
        Normalizer z;
        z.mean = ck.meta.feature_mean[j];
        z.sd = ck.meta.feature_sd[j];
        tm.feature_norms.push_back(z);
    }
    tm.target_norm.mean = ck.meta.target_mean;
    tm.target_norm.sd = ck.meta.target_sd;

    std::vector<int> all_rows(static_cast<std::size_t>(panel.rows()));
    for (std::size_t k = 0; k < all_rows.size(); ++k) all_rows[k] = static_cast<int>(k);
    std::vector<double> preds(all_rows.size(), kNaN);
    for (const auto& [row, value] : predict_rows(panel, tm, all_rows))
        preds[static_cast<std::size_t>(row)] = value;
    const EvaluationSeries ev = make_eval_series(panel, all_rows, preds);
    return recession_index(ev, window);
}

}  // namespace cyclebench
