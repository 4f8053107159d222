#pragma once
// Synthetic market data with a recession calendar, for fixtures and for the
// self-contained directional experiments. Log-returns follow a per-regime
// AR(1): recessions flip the autocorrelation sign and roughly triple the
// volatility, which is the distribution shift the models are probed with.

#include <cstdint>
#include <string>

#include "cyclebench/market_data.hpp"

namespace cyclebench {

// US recession intervals (peak month start through trough month end),
// December 1969 through the spring-2020 contraction, which is cut at
// 2020-05-13 where the modeling data ends.
RecessionCalendar nber_recession_calendar();

struct SyntheticSpec {
    int pre_days = 220;        // expansion run-in before the first recession
    int n_recessions = 8;
    int recession_days = 90;
    int expansion_days = 420;  // between recessions
    int post_days = 80;        // after the last recession
    double exp_sd = 0.009, rec_sd = 0.028;          // daily log-return SD
    double exp_drift = 3e-4, rec_drift = -1.2e-3;   // daily mean log-return
    double exp_ar = 0.25, rec_ar = -0.35;           // AR(1) coefficient
    double factor_noise_sd = 0.005;
    double rf_annual_pct = 4.0;  // annualized percent yield written to the factor file
    double s0 = 100.0;
    Date start{1970, 1, 2};
    std::uint64_t seed = 20200513;
};

struct SyntheticData {
    PriceSeries prices;
    FactorPanel factors;          // decimal units, daily rf
    RecessionCalendar calendar;
};

SyntheticData generate_synthetic_market(const SyntheticSpec& spec);

// prices.csv, factors.csv (percent units, annualized rf yield), recessions.csv
// under dir, in the formats the loaders consume.
void write_synthetic_csvs(const SyntheticData& data, const std::string& dir);

}  // namespace cyclebench
