// Command-line front end: run experiments, render comparison reports, drive
// the GBM baseline, and export the recession index for a checkpoint.
//
// Exit codes: 0 success, 1 bad configuration or usage, 2 every cell failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cyclebench/config.hpp"
#include "cyclebench/experiment.hpp"
#include "cyclebench/recession_index.hpp"
#include "cyclebench/synthetic.hpp"

namespace fs = std::filesystem;
using namespace cyclebench;

namespace {

int cmd_run(const std::string& config_path, bool force, int jobs) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const RunSummary summary = run_experiment(cfg, force, jobs, &std::cout);
    std::cout << "completed " << summary.completed << ", cached " << summary.skipped_existing
              << ", failed " << summary.failed << "; reports under " << summary.out_dir
              << "\n";
    if (summary.failed > 0 && summary.completed == 0 && summary.skipped_existing == 0) {
        std::cerr << "error: every cell failed\n";
        return 2;
    }
    return 0;
}

int cmd_report(const std::string& dir, const std::string& compare) {
    const ComparisonKind kind = comparison_from_string(compare);
    const auto rows = read_reports_csv((fs::path(dir) / "reports.csv").string());
    const ComparisonReport rep = emit_comparison_report(rows, kind);
    const std::string out_path =
        (fs::path(dir) / ("compare_" + compare + ".txt")).string();
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << rep.text;
    std::cout << rep.text;
    std::cout << "written to " << out_path << "\n";
    return 0;
}

int cmd_simulate_gbm(const std::string& config_path, int seeds, bool strict_mean,
                     const std::string& trainset) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    GbmRunOptions opt;
    opt.seeds = seeds;
    opt.strict_mean = strict_mean;
    opt.trainset = train_variant_from_string(trainset);
    const GbmRunResult res = run_gbm_experiment(cfg, opt);
    fs::create_directories(cfg.out_dir);
    write_reports_csv((fs::path(cfg.out_dir) / "gbm_reports.csv").string(), res.rows);
    const std::string sum_path = (fs::path(cfg.out_dir) / "gbm_summary.txt").string();
    std::ofstream out(sum_path);
    if (!out) throw std::runtime_error("cannot write " + sum_path);
    out << res.text;
    std::cout << res.text;
    std::cout << "written to " << sum_path << "\n";
    return 0;
}

int cmd_index(const std::string& config_path, const std::string& ckpt, int window) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const IndexSeries ix = index_from_checkpoint(cfg, ckpt, window);
    fs::create_directories(cfg.out_dir);
    const std::string out_path = (fs::path(cfg.out_dir) / "index.csv").string();
    write_index_csv(out_path, ix);
    std::cout << "recession index over " << ix.raw_se.size() << " days written to "
              << out_path << "\n";
    return 0;
}

int cmd_gen_data(const std::string& dir, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const SyntheticData data = generate_synthetic_market(spec);
    write_synthetic_csvs(data, dir);
    std::cout << "synthetic market data (" << data.prices.dates.size() << " days, "
              << data.calendar.intervals.size() << " recessions) written to " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Business-cycle stress tests for recurrent stock-price forecasters"};
    app.require_subcommand(1);

    std::string config_path, report_dir, compare_kind = "recession-vs-expansion";
    std::string ckpt_path, data_dir = "data";
    std::string trainset = "iswor";
    bool force = false, strict_mean = false;
    int jobs = 1, seeds = 30, window = 20;
    std::uint64_t gen_seed = 20200513;

    auto* run = app.add_subcommand("run", "Train and evaluate every configured cell");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_flag("--force", force, "retrain cells even when a .done file exists");
    run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Render a comparison table from reports.csv");
    report->add_option("--dir", report_dir, "experiment output directory")->required();
    report->add_option("--compare", compare_kind,
                       "rt-vs-nrt | rf-vs-norf | recession-vs-expansion");

    auto* gbm = app.add_subcommand("simulate-gbm", "Run the GBM baseline across seeds");
    gbm->add_option("--config", config_path, "experiment config file")->required();
    gbm->add_option("--seeds", seeds, "number of simulation seeds")->check(CLI::PositiveNumber);
    gbm->add_flag("--strict-mean", strict_mean, "use v*dt for the simulated mean");
    gbm->add_option("--trainset", trainset, "iswor | iswr");

    auto* index = app.add_subcommand("index", "Export the recession index for a checkpoint");
    index->add_option("--config", config_path, "experiment config file")->required();
    index->add_option("--model", ckpt_path, "checkpoint path")->required();
    index->add_option("--window", window, "median filter window")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen-data", "Write a synthetic market data set");
    gen->add_option("--dir", data_dir, "output directory");
    gen->add_option("--seed", gen_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, force, jobs);
        if (report->parsed()) return cmd_report(report_dir, compare_kind);
        if (gbm->parsed()) return cmd_simulate_gbm(config_path, seeds, strict_mean, trainset);
        if (index->parsed()) return cmd_index(config_path, ckpt_path, window);
        if (gen->parsed()) return cmd_gen_data(data_dir, gen_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
