#include "cyclebench/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cyclebench/csv.hpp"
#include "cyclebench/rng.hpp"

namespace cyclebench {

RecessionCalendar nber_recession_calendar() {
    RecessionCalendar cal;
    cal.intervals = {
        {{1969, 12, 1}, {1970, 11, 30}}, {{1973, 11, 1}, {1975, 3, 31}},
        {{1980, 1, 1}, {1980, 7, 31}},   {{1981, 7, 1}, {1982, 11, 30}},
        {{1990, 7, 1}, {1991, 3, 31}},   {{2001, 3, 1}, {2001, 11, 30}},
        {{2007, 12, 1}, {2009, 6, 30}},  {{2020, 2, 1}, {2020, 5, 13}},
    };
    return cal;
}

SyntheticData generate_synthetic_market(const SyntheticSpec& spec) {
    if (spec.n_recessions < 1 || spec.recession_days < 1 || spec.pre_days < 1)
        throw std::invalid_argument("generate_synthetic_market: bad layout");
    if (!(spec.s0 > 0.0)) throw std::invalid_argument("generate_synthetic_market: s0 <= 0");

    // Day schedule: run-in, then alternating recession / expansion blocks.
    std::vector<std::uint8_t> regime;  // 1 = recession
    auto extend = [&regime](int days, std::uint8_t flag) {
        regime.insert(regime.end(), static_cast<std::size_t>(days), flag);
    };
    extend(spec.pre_days, 0);
    for (int k = 0; k < spec.n_recessions; ++k) {
        extend(spec.recession_days, 1);
        extend(k + 1 < spec.n_recessions ? spec.expansion_days : spec.post_days, 0);
    }
    const std::size_t n = regime.size();

    std::vector<Date> dates(n);
    Date d = spec.start;
    while (weekday(d) >= 5) d = next_weekday(d);
    for (std::size_t t = 0; t < n; ++t) {
        dates[t] = d;
        d = next_weekday(d);
    }

    SyntheticData out;
    for (std::size_t t = 0; t < n; ++t) {
        if (regime[t] && (t == 0 || !regime[t - 1])) {
            out.calendar.intervals.push_back({dates[t], dates[t]});
        }
        if (regime[t]) out.calendar.intervals.back().end = dates[t];
    }

    Rng rng(spec.seed);
    const double rf_daily = spec.rf_annual_pct * 0.01 / 252.0;
    out.prices.dates = dates;
    out.prices.close.resize(n);
    out.factors.dates = dates;
    out.factors.values.resize(static_cast<Eigen::Index>(n), 4);
    out.factors.rf.assign(n, rf_daily);

    double price = spec.s0;
    double dev = 0.0;  // AR(1) deviation from the regime mean
    double prev_ret = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const bool rec = regime[t] != 0;
        const double mu = rec ? spec.rec_drift : spec.exp_drift;
        const double phi = rec ? spec.rec_ar : spec.exp_ar;
        const double sd = rec ? spec.rec_sd : spec.exp_sd;
        // innovation scaled so the stationary SD stays near sd
        const double inn = sd * std::sqrt(std::max(0.0, 1.0 - phi * phi));
        double ret = 0.0;
        if (t > 0) {
            dev = phi * dev + rng.normal(0.0, inn);
            ret = mu + dev;
            price *= std::exp(ret);
        }
        out.prices.close[t] = price;
        const Eigen::Index r = static_cast<Eigen::Index>(t);
        out.factors.values(r, 0) = t == 0 ? 0.0 : ret - rf_daily;
        out.factors.values(r, 1) = 0.2 * ret + rng.normal(0.0, spec.factor_noise_sd);
        out.factors.values(r, 2) = -0.1 * ret + rng.normal(0.0, spec.factor_noise_sd);
        out.factors.values(r, 3) =
            0.3 * (ret - prev_ret) + rng.normal(0.0, spec.factor_noise_sd);
        prev_ret = ret;
    }
    return out;
}

void write_synthetic_csvs(const SyntheticData& data, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const auto join = [&dir](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };
    {
        std::ofstream out(join("prices.csv"));
        if (!out) throw std::runtime_error("cannot write " + join("prices.csv"));
        out << "date,close\n";
        for (std::size_t t = 0; t < data.prices.dates.size(); ++t)
            out << to_string(data.prices.dates[t]) << ','
                << csv::format_double(data.prices.close[t]) << "\n";
    }
    {
        std::ofstream out(join("factors.csv"));
        if (!out) throw std::runtime_error("cannot write " + join("factors.csv"));
        out << "date,mkt_rf,smb,hml,mom,rf\n";
        for (std::size_t t = 0; t < data.factors.dates.size(); ++t) {
            out << to_string(data.factors.dates[t]);
            for (int j = 0; j < 4; ++j)
                out << ',' << csv::format_double(100.0 * data.factors.values(static_cast<Eigen::Index>(t), j));
            // stored as an annualized percent yield, the loader's input unit
            out << ',' << csv::format_double(100.0 * 252.0 * data.factors.rf[t]) << "\n";
        }
    }
    {
        std::ofstream out(join("recessions.csv"));
        if (!out) throw std::runtime_error("cannot write " + join("recessions.csv"));
        out << "start,end\n";
        for (const auto& iv : data.calendar.intervals)
            out << to_string(iv.start) << ',' << to_string(iv.end) << "\n";
    }
}

}  // namespace cyclebench
