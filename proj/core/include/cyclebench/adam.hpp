#pragma once
// Adam with bias correction. One scalar kernel, mapped over every parameter
// tensor in the shared flattening order.

#include "cyclebench/model.hpp"

namespace cyclebench {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    ModelParams m, v;  // first and second moment mirrors
    long t = 0;        // completed steps
};

AdamState make_adam_state(const ModelParams& like);

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), with
// m_hat = m / (1 - beta1^t), v_hat = v / (1 - beta2^t).
inline double adam_scalar_update(double& m, double& v, double grad, long t,
                                 const AdamConfig& c) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad * grad;
    const double m_hat = m / (1.0 - std::pow(c.beta1, static_cast<double>(t)));
    const double v_hat = v / (1.0 - std::pow(c.beta2, static_cast<double>(t)));
    return -c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
}

// Applies one update in place; grads must share the architecture of params.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               const AdamConfig& cfg = {});

}  // namespace cyclebench
