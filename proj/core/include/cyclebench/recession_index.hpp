#pragma once
// Data-driven recession indicator: squared log-return prediction errors
// smoothed by a centered median filter.

#include <string>
#include <vector>

#include "cyclebench/date.hpp"
#include "cyclebench/metrics.hpp"

namespace cyclebench {

struct IndexSeries {
    std::vector<Date> dates;      // aligned to entries t >= 1 of the source
    std::vector<double> raw_se;   // squared log-return errors
    std::vector<double> filtered; // median-filtered values
};

// e_t = (ln(Shat_t/S_{t-1}) - ln(S_t/S_{t-1}))^2 for every entry with a
// prediction and a consecutive predecessor; one value per usable entry.
std::vector<double> squared_logreturn_errors(const EvaluationSeries& ev);

// Centered window truncated at the boundaries; position i covers
// [i - w/2, i + (w-1)/2]. Even slice lengths take the lower median.
std::vector<double> median_filter(const std::vector<double>& x, int window = 20);

IndexSeries recession_index(const EvaluationSeries& ev, int window = 20);

// date,raw_se,filtered_se
void write_index_csv(const std::string& path, const IndexSeries& ix);

}  // namespace cyclebench
