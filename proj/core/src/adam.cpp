#include "cyclebench/adam.hpp"

#include <stdexcept>

namespace cyclebench {

AdamState make_adam_state(const ModelParams& like) {
    AdamState s;
    s.m = zeros_like(like);
    s.v = zeros_like(like);
    s.t = 0;
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const AdamConfig& cfg) {
    auto prefs = tensor_refs(params);
    auto grefs = tensor_refs(grads);
    auto mrefs = tensor_refs(state.m);
    auto vrefs = tensor_refs(state.v);
    if (prefs.size() != grefs.size())
        throw std::invalid_argument("adam_step: gradient architecture mismatch");
    ++state.t;
    for (std::size_t k = 0; k < prefs.size(); ++k) {
        if (prefs[k].size() != grefs[k].size())
            throw std::invalid_argument("adam_step: tensor size mismatch at " + prefs[k].name);
        for (Eigen::Index idx = 0; idx < prefs[k].size(); ++idx) {
            prefs[k].data[idx] += adam_scalar_update(mrefs[k].data[idx], vrefs[k].data[idx],
                                                     grefs[k].data[idx], state.t, cfg);
        }
    }
}

}  // namespace cyclebench
