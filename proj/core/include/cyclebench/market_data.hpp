#pragma once
// Daily market data: index price series, factor panel, recession calendar,
// and the aligned feature panel the models consume.
//
// File formats (all UTF-8, comma-delimited, '.' decimal point, ISO dates):
//   prices.csv      header `date,close`
//   factors.csv     header `date,mkt_rf,smb,hml,mom[,rf]`
//   recessions.csv  header `start,end`
//
// Factor units: vendor files publish percents; the loader flag converts to
// daily decimals (0.52 -> 0.0052). The rf column is an annualized yield and
// is additionally divided by 252 to a daily rate, the convention the ERP
// metric consumes.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cyclebench/date.hpp"

namespace cyclebench {

struct PriceSeries {
    std::vector<Date> dates;    // strictly increasing
    std::vector<double> close;  // > 0
};

struct FactorPanel {
    std::vector<Date> dates;  // strictly increasing
    Eigen::MatrixXd values;   // rows x 4: mkt_rf, smb, hml, mom (daily decimals)
    std::vector<double> rf;   // daily decimal rate; empty when the file has no rf column
    bool has_rf() const { return !rf.empty(); }
};

struct RecessionInterval {
    Date start, end;  // closed: both endpoints inside the recession
};

struct RecessionCalendar {
    std::vector<RecessionInterval> intervals;  // disjoint, strictly increasing
    bool contains(const Date& d) const;
};

struct FeaturePanel {
    std::vector<Date> dates;              // trading days, strictly increasing
    Eigen::MatrixXd features;             // rows x d: close, mkt_rf, smb, hml, mom [, rf]
    std::vector<double> target;           // index level, equals features column 0
    std::vector<double> rf;               // daily rate for metrics; empty when unavailable
    std::vector<std::uint8_t> recession;  // 1 inside a calendar interval
    std::vector<std::string> feature_names;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
    bool has_rf() const { return !rf.empty(); }
};

// Loaders. All throw std::runtime_error/std::invalid_argument with the file
// path and line number in the message.
PriceSeries load_price_csv(const std::string& path);
FactorPanel load_factor_csv(const std::string& path, bool percent_units);
RecessionCalendar load_recession_calendar(const std::string& path);

// Inner-join of prices and factors on dates (unmatched days dropped, order
// preserved); recession flags from calendar membership. With use_rf the
// risk-free column joins the feature matrix; it is an error if the factor
// file lacks it.
FeaturePanel align_panel(const PriceSeries& prices, const FactorPanel& factors,
                         const RecessionCalendar& calendar, bool use_rf);

// Round-trip serialization of an aligned panel (exact values).
void save_panel_csv(const FeaturePanel& panel, const std::string& path);
FeaturePanel load_panel_csv(const std::string& path);

}  // namespace cyclebench
