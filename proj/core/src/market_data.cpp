#include "cyclebench/market_data.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "cyclebench/csv.hpp"

namespace cyclebench {

namespace {

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

void require_header(const csv::Table& t, const std::string& path,
                    const std::vector<std::string>& required) {
    for (const auto& name : required)
        if (csv::column_index(t, name) < 0)
            fail(path, 1, "missing required column '" + name + "'");
}

}  // namespace

bool RecessionCalendar::contains(const Date& d) const {
    // Intervals are sorted; find the first one ending at or after d.
    auto it = std::lower_bound(intervals.begin(), intervals.end(), d,
                               [](const RecessionInterval& iv, const Date& x) {
                                   return iv.end < x;
                               });
    return it != intervals.end() && !(d < it->start);
}

PriceSeries load_price_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty()) fail(path, 1, "empty file");
    require_header(t, path, {"date", "close"});
    const int c_date = csv::column_index(t, "date");
    const int c_close = csv::column_index(t, "close");

    PriceSeries out;
    out.dates.reserve(t.rows.size());
    out.close.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const int line = t.line_numbers[r];
        if (int(row.size()) <= std::max(c_date, c_close))
            fail(path, line, "too few fields");
        Date d;
        try {
            d = parse_date(row[c_date]);
        } catch (const std::exception& e) {
            fail(path, line, e.what());
        }
        if (!out.dates.empty() && !(out.dates.back() < d))
            fail(path, line, "dates not strictly increasing at " + to_string(d));
        double close = 0.0;
        try {
            close = csv::to_double(row[c_close], "close");
        } catch (const std::exception& e) {
            fail(path, line, e.what());
        }
        if (!(close > 0.0))
            fail(path, line, "non-positive close " + row[c_close]);
        out.dates.push_back(d);
        out.close.push_back(close);
    }
    return out;
}

FactorPanel load_factor_csv(const std::string& path, bool percent_units) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty()) fail(path, 1, "empty file");
    static const std::vector<std::string> kFactors = {"mkt_rf", "smb", "hml", "mom"};
    require_header(t, path, {"date"});
    require_header(t, path, kFactors);
    const int c_date = csv::column_index(t, "date");
    const int c_rf = csv::column_index(t, "rf");
    int c_fac[4];
    for (int j = 0; j < 4; ++j) c_fac[j] = csv::column_index(t, kFactors[j]);

    const double scale = percent_units ? 0.01 : 1.0;
    const auto n = Eigen::Index(t.rows.size());
    FactorPanel out;
    out.dates.reserve(t.rows.size());
    out.values.resize(n, 4);
    if (c_rf >= 0) out.rf.reserve(t.rows.size());

    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const int line = t.line_numbers[r];
        Date d;
        try {
            d = parse_date(row[c_date]);
            for (int j = 0; j < 4; ++j)
                out.values(Eigen::Index(r), j) =
                    scale * csv::to_double(row[c_fac[j]], kFactors[j]);
            if (c_rf >= 0) {
                // Annualized yield -> daily rate.
                out.rf.push_back(scale * csv::to_double(row[c_rf], "rf") / 252.0);
            }
        } catch (const std::exception& e) {
            fail(path, line, e.what());
        }
        if (!out.dates.empty() && !(out.dates.back() < d))
            fail(path, line, "dates not strictly increasing at " + to_string(d));
        out.dates.push_back(d);
    }
    return out;
}

RecessionCalendar load_recession_calendar(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty()) fail(path, 1, "empty file");
    require_header(t, path, {"start", "end"});
    const int c_start = csv::column_index(t, "start");
    const int c_end = csv::column_index(t, "end");

    RecessionCalendar out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const int line = t.line_numbers[r];
        RecessionInterval iv;
        try {
            iv.start = parse_date(row[c_start]);
            iv.end = parse_date(row[c_end]);
        } catch (const std::exception& e) {
            fail(path, line, e.what());
        }
        if (iv.end < iv.start)
            fail(path, line, "interval end " + to_string(iv.end) + " before start " +
                                 to_string(iv.start));
        out.intervals.push_back(iv);
    }
    std::sort(out.intervals.begin(), out.intervals.end(),
              [](const RecessionInterval& a, const RecessionInterval& b) {
                  return a.start < b.start;
              });
    for (size_t i = 1; i < out.intervals.size(); ++i) {
        // Closed intervals: sharing a boundary date counts as overlap.
        if (!(out.intervals[i - 1].end < out.intervals[i].start))
            fail(path, 1, "overlapping recession intervals " +
                              to_string(out.intervals[i - 1].end) + " / " +
                              to_string(out.intervals[i].start));
    }
    return out;
}

FeaturePanel align_panel(const PriceSeries& prices, const FactorPanel& factors,
                         const RecessionCalendar& calendar, bool use_rf) {
    if (prices.dates.empty() || factors.dates.empty())
        throw std::invalid_argument("align_panel: empty input");
    if (use_rf && !factors.has_rf())
        throw std::invalid_argument("align_panel: use_rf requested but factor panel has no rf column");

    // Two-pointer inner join over sorted date vectors.
    std::vector<std::pair<size_t, size_t>> matched;
    size_t i = 0, j = 0;
    while (i < prices.dates.size() && j < factors.dates.size()) {
        if (prices.dates[i] < factors.dates[j]) {
            ++i;
        } else if (factors.dates[j] < prices.dates[i]) {
            ++j;
        } else {
            matched.emplace_back(i, j);
            ++i;
            ++j;
        }
    }
    if (matched.empty())
        throw std::invalid_argument("align_panel: price and factor dates do not intersect");

    FeaturePanel out;
    const Eigen::Index n = Eigen::Index(matched.size());
    const Eigen::Index d = use_rf ? 6 : 5;
    out.features.resize(n, d);
    out.feature_names = {"close", "mkt_rf", "smb", "hml", "mom"};
    if (use_rf) out.feature_names.push_back("rf");
    out.dates.reserve(matched.size());
    out.target.reserve(matched.size());
    out.recession.reserve(matched.size());
    if (factors.has_rf()) out.rf.reserve(matched.size());

    for (Eigen::Index r = 0; r < n; ++r) {
        const auto [pi, fj] = matched[r];
        const Date& date = prices.dates[pi];
        out.dates.push_back(date);
        out.target.push_back(prices.close[pi]);
        out.features(r, 0) = prices.close[pi];
        out.features.block(r, 1, 1, 4) = factors.values.row(Eigen::Index(fj));
        if (use_rf) out.features(r, 5) = factors.rf[fj];
        if (factors.has_rf()) out.rf.push_back(factors.rf[fj]);
        out.recession.push_back(calendar.contains(date) ? 1 : 0);
    }
    return out;
}

void save_panel_csv(const FeaturePanel& panel, const std::string& path) {
    // A metrics-only rf series (present but not a model feature) is written
    // as `rf_metric` so the feature dimension survives the round trip.
    const bool rf_extra =
        panel.has_rf() && (panel.feature_names.empty() || panel.feature_names.back() != "rf");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "date";
    for (const auto& name : panel.feature_names) out << ',' << name;
    if (rf_extra) out << ",rf_metric";
    out << ",recession\n";
    for (Eigen::Index r = 0; r < panel.rows(); ++r) {
        out << to_string(panel.dates[r]);
        for (Eigen::Index c = 0; c < panel.dim(); ++c)
            out << ',' << csv::format_double(panel.features(r, c));
        if (rf_extra) out << ',' << csv::format_double(panel.rf[r]);
        out << ',' << int(panel.recession[r]) << '\n';
    }
}

FeaturePanel load_panel_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty()) fail(path, 1, "empty file");
    if (t.header.front() != "date" || t.header.back() != "recession")
        fail(path, 1, "not a serialized panel (expect date,...,recession)");

    FeaturePanel out;
    bool rf_extra = false;
    for (size_t c = 1; c + 1 < t.header.size(); ++c) {
        if (t.header[c] == "rf_metric") {
            rf_extra = true;
            break;
        }
        out.feature_names.push_back(t.header[c]);
    }
    const int n_features = int(out.feature_names.size());
    const bool rf_is_feature = n_features > 0 && out.feature_names.back() == "rf";

    const Eigen::Index n = Eigen::Index(t.rows.size());
    out.features.resize(n, n_features);
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const int line = t.line_numbers[r];
        if (row.size() != t.header.size()) fail(path, line, "field count mismatch");
        try {
            out.dates.push_back(parse_date(row[0]));
            for (int c = 0; c < n_features; ++c)
                out.features(Eigen::Index(r), c) =
                    csv::to_double(row[1 + c], out.feature_names[c]);
            if (rf_extra)
                out.rf.push_back(csv::to_double(row[1 + n_features], "rf_metric"));
            out.recession.push_back(std::uint8_t(csv::to_double(row.back(), "recession") != 0.0));
        } catch (const std::exception& e) {
            fail(path, line, e.what());
        }
        out.target.push_back(out.features(Eigen::Index(r), 0));
    }
    if (rf_is_feature) {
        out.rf.resize(out.dates.size());
        for (Eigen::Index r = 0; r < n; ++r) out.rf[r] = out.features(r, n_features - 1);
    }
    return out;
}

}  // namespace cyclebench
