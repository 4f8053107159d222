#pragma once
// Deterministic randomness, pinned in one place. std::mt19937_64 is
// bit-exact across platforms by [rand.eng.mers]; uniforms take the top 53
// bits; Gaussians come from the Marsaglia polar transform. Distribution
// classes from <random> are implementation-defined and would silently break
// the bitwise-reproducibility guarantees, so they are not used anywhere.

#include <cstdint>
#include <random>

namespace cyclebench {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // N(0, 1) via the polar method; pairs are generated, the spare cached.
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Uniform integer in [0, n), n >= 1. Modulo bias is irrelevant at the
    // sizes used here (shuffles over at most a few thousand windows).
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cyclebench
