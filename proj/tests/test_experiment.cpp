#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cyclebench/experiment.hpp"
#include "cyclebench/synthetic.hpp"
#include "test_util.hpp"

using namespace cyclebench;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ReportRow row(const std::string& sp, const std::string& model, const std::string& ts,
              const std::string& fv, const std::string& regime, double mse, double r2,
              double cg) {
    return {sp, model, ts, fv, regime, mse, r2, cg};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("plan_cells enumerates the canonical cross product") {
    ExperimentConfig cfg;
    cfg.kinds = {ModelKind::lstm, ModelKind::gru};
    cfg.variants = {TrainVariant::iswor, TrainVariant::iswr};
    cfg.use_rf = true;
    const auto cells = plan_cells(2, cfg);
    REQUIRE(cells.size() == 16);
    // sub-period major, then kind, then train set, then features
    CHECK(cells[0].subperiod == 0);
    CHECK(cells[0].kind == ModelKind::lstm);
    CHECK(cells[0].trainset == TrainVariant::iswor);
    CHECK(cells[0].features == FeatureVariant::base);
    CHECK(cells[1].features == FeatureVariant::rf);
    CHECK(cells[2].trainset == TrainVariant::iswr);
    CHECK(cells[4].kind == ModelKind::gru);
    CHECK(cells[8].subperiod == 1);
    for (std::size_t i = 0; i < cells.size(); ++i)
        CHECK(cells[i].index == i);

    cfg.use_rf = false;
    CHECK(plan_cells(2, cfg).size() == 8);
    CHECK_THROWS(plan_cells(0, cfg));
}

TEST_CASE("reports csv round trips including NaN") {
    testutil::TempDir tmp("rep");
    const std::vector<ReportRow> rows{
        row("73-80", "gru", "iswor", "base", "all", 0.25, 0.01, -0.002),
        row("73-80", "gru", "iswor", "base", "recession", kNaN, kNaN, kNaN),
    };
    write_reports_csv(tmp.file("reports.csv"), rows);
    const auto back = read_reports_csv(tmp.file("reports.csv"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].subperiod == "73-80");
    CHECK(back[0].mse == 0.25);
    CHECK(back[0].cerg_gain == -0.002);
    CHECK(back[1].regime == "recession");
    CHECK(std::isnan(back[1].mse));
    CHECK(std::isnan(back[1].r2));
}

TEST_CASE("comparison string mapping") {
    CHECK(comparison_from_string("rt-vs-nrt") == ComparisonKind::rt_vs_nrt);
    CHECK(comparison_from_string("rf-vs-norf") == ComparisonKind::rf_vs_norf);
    CHECK(comparison_from_string("recession-vs-expansion") ==
          ComparisonKind::recession_vs_expansion);
    CHECK_THROWS(comparison_from_string("everything"));
}

TEST_CASE("recession-vs-expansion report counts strict wins and skips NaN") {
    std::vector<ReportRow> rows;
    // model a: recession strictly worse everywhere
    rows.push_back(row("73-80", "a", "iswor", "base", "recession", 3.0, -1.0, -0.1));
    rows.push_back(row("73-80", "a", "iswor", "base", "expansion", 1.0, 0.5, 0.2));
    // model b: NaN recession MSE, tie on cerg
    rows.push_back(row("73-80", "b", "iswor", "base", "recession", kNaN, -0.2, 0.3));
    rows.push_back(row("73-80", "b", "iswor", "base", "expansion", 1.0, 0.1, 0.3));
    // model c: only a recession row; must produce a warning, not a table line
    rows.push_back(row("73-80", "c", "iswor", "base", "recession", 2.0, 0.0, 0.0));

    const ComparisonReport rep =
        emit_comparison_report(rows, ComparisonKind::recession_vs_expansion);
    REQUIRE(rep.counts.size() == 3);
    CHECK(rep.counts[0].what == "recession MSE > expansion MSE");
    CHECK(rep.counts[0].hits == 1);
    CHECK(rep.counts[0].total == 1);  // b's NaN never entered
    CHECK(rep.counts[1].hits == 2);   // both a and b have rec r2 < exp r2
    CHECK(rep.counts[1].total == 2);
    CHECK(rep.counts[2].hits == 1);   // cerg tie on b does not count
    CHECK(rep.counts[2].total == 2);
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("73-80 c") != std::string::npos);
    CHECK(rep.text.find("recession MSE > expansion MSE: 1 of 1") != std::string::npos);
}

TEST_CASE("rt-vs-nrt report pairs train variants") {
    std::vector<ReportRow> rows;
    auto push6 = [&](const std::string& ts, double rec_mse, double exp_mse, double r2,
                     double cg) {
        rows.push_back(row("73-80", "gru", ts, "base", "recession", rec_mse, kNaN, kNaN));
        rows.push_back(row("73-80", "gru", ts, "base", "expansion", exp_mse, kNaN, kNaN));
        rows.push_back(row("73-80", "gru", ts, "base", "all", 0.5 * (rec_mse + exp_mse), r2,
                           cg));
    };
    push6("iswor", 2.0, 0.5, -0.2, 0.02);  // the nrt baseline
    push6("iswr", 1.0, 0.8, 0.1, 0.01);    // recession-trained

    // an unpaired second sub-period triggers a warning
    rows.push_back(row("80-91", "gru", "iswor", "base", "all", 1.0, 0.1, 0.0));

    const ComparisonReport rep = emit_comparison_report(rows, ComparisonKind::rt_vs_nrt);
    REQUIRE(rep.counts.size() == 4);
    CHECK(rep.counts[0].what == "recession MSE: NRT > RT");
    CHECK(rep.counts[0].hits == 1);
    CHECK(rep.counts[0].total == 1);
    CHECK(rep.counts[1].hits == 0);  // nrt expansion mse is smaller
    CHECK(rep.counts[2].what == "overall R2: RT > NRT");
    CHECK(rep.counts[2].hits == 1);
    CHECK(rep.counts[3].hits == 0);  // rt cerg is lower
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("80-91") != std::string::npos);
}

TEST_CASE("experiment end to end on synthetic data") {
    // small but complete market: 3 recessions -> 2 sub-periods
    SyntheticSpec spec;
    spec.n_recessions = 3;
    spec.pre_days = 80;
    spec.recession_days = 45;
    spec.expansion_days = 150;
    spec.post_days = 60;
    spec.seed = 99;
    const SyntheticData data = generate_synthetic_market(spec);
    testutil::TempDir tmp("exp");
    write_synthetic_csvs(data, tmp.str());

    ExperimentConfig cfg;
    cfg.prices_path = tmp.file("prices.csv");
    cfg.factors_path = tmp.file("factors.csv");
    cfg.recessions_path = tmp.file("recessions.csv");
    cfg.kinds = {ModelKind::gru};
    cfg.variants = {TrainVariant::iswor, TrainVariant::iswr};
    cfg.use_rf = false;
    cfg.grid.widths = {3};
    cfg.grid.lags = {2};
    cfg.train.max_epochs = 3;
    cfg.train.patience = 3;
    cfg.train.seed = 7;
    cfg.out_dir = tmp.file("out");

    const RunSummary first = run_experiment(cfg, false, 2);
    CHECK(first.completed == 4);  // 2 sub-periods x 1 kind x 2 variants
    CHECK(first.skipped_existing == 0);
    CHECK(first.failed == 0);
    REQUIRE(first.results.size() == 4);
    for (const CellResult& c : first.results) {
        CHECK_FALSE(c.failed);
        CHECK(c.width == 3);
        CHECK(c.lag == 2);
        CHECK(std::isfinite(c.all.mse));
    }

    CHECK(fs::exists(fs::path(cfg.out_dir) / "reports.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "yearly.csv"));
    CHECK(fs::exists(fs::path(cfg.out_dir) / "splits.json"));
    const std::string reports1 = slurp((fs::path(cfg.out_dir) / "reports.csv").string());
    const auto rows = read_reports_csv((fs::path(cfg.out_dir) / "reports.csv").string());
    CHECK(rows.size() == 12);  // three regime rows per cell
    CHECK(rows[0].regime == "all");
    CHECK(rows[1].regime == "recession");
    CHECK(rows[2].regime == "expansion");

    // a second run reuses every cell and reproduces the bytes
    const RunSummary second = run_experiment(cfg, false, 1);
    CHECK(second.completed == 0);
    CHECK(second.skipped_existing == 4);
    CHECK(slurp((fs::path(cfg.out_dir) / "reports.csv").string()) == reports1);

    // forcing retrains deterministically
    const RunSummary forced = run_experiment(cfg, true, 2);
    CHECK(forced.completed == 4);
    CHECK(slurp((fs::path(cfg.out_dir) / "reports.csv").string()) == reports1);

    // the checkpoint feeds the index exporter
    const std::string ckpt = (fs::path(cfg.out_dir) / "base" /
                              (first.results[0].label + "_gru_3_2_iswor.ckpt"))
                                 .string();
    REQUIRE(fs::exists(ckpt));
    const IndexSeries ix = index_from_checkpoint(cfg, ckpt, 5);
    CHECK(ix.raw_se.size() > 100);
    CHECK(ix.filtered.size() == ix.raw_se.size());

    // the GBM baseline walks the same splits
    GbmRunOptions opt;
    opt.seeds = 3;
    const GbmRunResult gbm = run_gbm_experiment(cfg, opt);
    CHECK(gbm.rows.size() == 6);  // three regime rows per sub-period
    CHECK(gbm.rows[0].model == "gbm");
    CHECK(gbm.text.find("GBM baseline") != std::string::npos);
    if (std::isfinite(gbm.fraction_rec_gt_exp)) {
        CHECK(gbm.fraction_rec_gt_exp >= 0.0);
        CHECK(gbm.fraction_rec_gt_exp <= 1.0);
    }
}

TEST_CASE("missing data files fail the run loudly") {
    ExperimentConfig cfg;
    cfg.prices_path = "/nonexistent/p.csv";
    cfg.factors_path = "/nonexistent/f.csv";
    cfg.recessions_path = "/nonexistent/r.csv";
    CHECK_THROWS(run_experiment(cfg));
}
