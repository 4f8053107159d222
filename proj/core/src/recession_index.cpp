#include "cyclebench/recession_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cyclebench/csv.hpp"

namespace cyclebench {

namespace {

void collect_errors(const EvaluationSeries& ev, std::vector<double>& se,
                    std::vector<Date>* dates) {
    if (ev.size() < 2)
        throw std::invalid_argument("squared_logreturn_errors: need at least two rows");
    for (std::size_t t = 1; t < ev.size(); ++t) {
        if (!ev.contiguous_at(t)) continue;
        if (!std::isfinite(ev.s_pred[t])) continue;
        if (!(ev.s_true[t] > 0.0) || !(ev.s_true[t - 1] > 0.0) || !(ev.s_pred[t] > 0.0))
            throw std::runtime_error("squared_logreturn_errors: non-positive price");
        const double d = std::log(ev.s_pred[t] / ev.s_true[t - 1]) -
                         std::log(ev.s_true[t] / ev.s_true[t - 1]);
        se.push_back(d * d);
        if (dates) dates->push_back(ev.dates[t]);
    }
}

}  // namespace

std::vector<double> squared_logreturn_errors(const EvaluationSeries& ev) {
    std::vector<double> se;
    collect_errors(ev, se, nullptr);
    return se;
}

std::vector<double> median_filter(const std::vector<double>& x, int window) {
    if (window < 1) throw std::invalid_argument("median_filter: window must be >= 1");
    if (x.empty()) throw std::invalid_argument("median_filter: empty input");
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size());
    std::vector<double> slice;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - window / 2);
        const int hi = std::min(n - 1, i + (window - 1) / 2);
        slice.assign(x.begin() + lo, x.begin() + hi + 1);
        // lower median: the (k-1)/2-th order statistic of k values
        const std::size_t mid = (slice.size() - 1) / 2;
        std::nth_element(slice.begin(), slice.begin() + static_cast<std::ptrdiff_t>(mid),
                         slice.end());
        out[static_cast<std::size_t>(i)] = slice[mid];
    }
    return out;
}

IndexSeries recession_index(const EvaluationSeries& ev, int window) {
    IndexSeries ix;
    collect_errors(ev, ix.raw_se, &ix.dates);
    if (ix.raw_se.empty())
        throw std::runtime_error("recession_index: no usable prediction entries");
    ix.filtered = median_filter(ix.raw_se, window);
    return ix;
}

void write_index_csv(const std::string& path, const IndexSeries& ix) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write index: " + path);
    out << "date,raw_se,filtered_se\n";
    for (std::size_t i = 0; i < ix.raw_se.size(); ++i)
        out << to_string(ix.dates[i]) << ',' << csv::format_double(ix.raw_se[i]) << ','
            << csv::format_double(ix.filtered[i]) << "\n";
    if (!out) throw std::runtime_error("write failure on index: " + path);
}

}  // namespace cyclebench
