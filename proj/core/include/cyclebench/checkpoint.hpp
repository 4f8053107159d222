#pragma once
// Text checkpoints. Values are written as C hex float literals so that a
// save/load round trip is bitwise exact; everything else is line oriented
// and greppable.

#include <cstdint>
#include <string>
#include <vector>

#include "cyclebench/model.hpp"

namespace cyclebench {

struct CheckpointMeta {
    int lag = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    std::vector<double> feature_mean, feature_sd;  // one entry per feature
    double target_mean = 0.0;
    double target_sd = 1.0;
};

struct Checkpoint {
    ModelParams params;
    CheckpointMeta meta;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cyclebench
