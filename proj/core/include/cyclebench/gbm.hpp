#pragma once
// Geometric-Brownian-motion baseline: i.i.d. Gaussian log-returns with
// moments fitted on training data.

#include <cstdint>
#include <vector>

#include "cyclebench/rng.hpp"

namespace cyclebench {

struct GbmParams {
    double v = 0.0;       // mean log-return per day
    double sigma2 = 0.0;  // log-return variance per day
    double dt = 1.0;      // trading days per step
};

// v = sample mean, sigma2 = sample variance (n-1 denominator).
GbmParams fit_gbm(const std::vector<double>& train_logreturns);

// n draws from Normal(v, sigma2 * dt). The mean is v as written, not v * dt;
// strict_mean switches to v * dt for dt != 1.
std::vector<double> simulate_logreturns(std::size_t n, const GbmParams& p,
                                        std::uint64_t seed, bool strict_mean = false);

}  // namespace cyclebench
