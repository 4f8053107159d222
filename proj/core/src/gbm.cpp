#include "cyclebench/gbm.hpp"

#include <cmath>
#include <stdexcept>

namespace cyclebench {

GbmParams fit_gbm(const std::vector<double>& train_logreturns) {
    if (train_logreturns.size() < 2)
        throw std::invalid_argument("fit_gbm: need at least two log-returns");
    const double n = static_cast<double>(train_logreturns.size());
    double mean = 0.0;
    for (double r : train_logreturns) mean += r;
    mean /= n;
    double ss = 0.0;
    for (double r : train_logreturns) ss += (r - mean) * (r - mean);
    GbmParams p;
    p.v = mean;
    p.sigma2 = ss / (n - 1.0);
    return p;
}

std::vector<double> simulate_logreturns(std::size_t n, const GbmParams& p,
                                        std::uint64_t seed, bool strict_mean) {
    if (n < 1) throw std::invalid_argument("simulate_logreturns: n must be >= 1");
    if (p.sigma2 < 0.0 || p.dt <= 0.0)
        throw std::invalid_argument("simulate_logreturns: bad GBM parameters");
    const double mean = strict_mean ? p.v * p.dt : p.v;
    const double sd = std::sqrt(p.sigma2 * p.dt);
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal(mean, sd);
    return out;
}

}  // namespace cyclebench
