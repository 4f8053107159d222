#pragma once
// Two stacked recurrent layers of equal width, inverted dropout on the
// activations passed between them (training mode only), and a scalar dense
// head read at the final step. Everything is double precision.

#include <string>
#include <vector>

#include "cyclebench/rng.hpp"
#include "cyclebench/rnn_cells.hpp"

namespace cyclebench {

enum class ModelKind { lstm, blstm, gru };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
std::string to_string(LstmHSource s);
LstmHSource h_source_from_string(const std::string& s);

struct ModelParams {
    ModelKind kind = ModelKind::gru;
    LstmHSource h_source = LstmHSource::candidate;
    int width = 0;      // units per layer (per direction for blstm)
    int input_dim = 0;  // features per time step
    // lstm: {layer1, layer2}; blstm: {layer1.fwd, layer1.bwd, layer2.fwd, layer2.bwd}
    std::vector<LstmParams> lstm;
    // gru: {layer1, layer2}
    std::vector<GruParams> gru;
    Vec dense_w;
    double dense_b = 0.0;

    Eigen::Index dense_in() const { return kind == ModelKind::blstm ? 2 * width : width; }
};

// Named, mutable view over every parameter tensor; the flattening order is
// fixed and shared by Adam, checkpoints and finite differences.
struct TensorRef {
    std::string name;  // e.g. "layer1.fwd.W_f"
    double* data;
    Eigen::Index rows = 0, cols = 0;  // cols == 1 for vectors and scalars
    Eigen::Index size() const { return rows * cols; }
};
struct ConstTensorRef {
    std::string name;
    const double* data;
    Eigen::Index rows = 0, cols = 0;
    Eigen::Index size() const { return rows * cols; }
};
std::vector<TensorRef> tensor_refs(ModelParams& p);
std::vector<ConstTensorRef> tensor_refs(const ModelParams& p);
Eigen::Index param_count(const ModelParams& p);

// All-zero parameter set of the given architecture (also used for gradients
// and optimizer moments).
ModelParams make_model(ModelKind kind, int width, int input_dim,
                       LstmHSource h_source = LstmHSource::candidate);
ModelParams zeros_like(const ModelParams& p);

// Weights ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases zero.
// Draw order follows tensor_refs, column-major within each tensor.
ModelParams glorot_init(ModelKind kind, int width, int input_dim, Rng& rng,
                        LstmHSource h_source = LstmHSource::candidate);

// window: lag x input_dim, one row per time step, oldest first.
// train = true applies inverted dropout between the layers, drawing one mask
// element per (step, unit) from rng; rng may be null when train is false.
double model_forward(const Mat& window, const ModelParams& p, bool train = false,
                     Rng* rng = nullptr, double dropout_rate = 0.2);

struct BackwardResult {
    double pred = 0.0;
    double loss = 0.0;  // squared error + l2 * sum of squared parameters
    ModelParams grads;
};
BackwardResult model_backward(const Mat& window, double target, const ModelParams& p,
                              bool train = false, Rng* rng = nullptr,
                              double dropout_rate = 0.2, double l2 = 0.0);

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::string worst_entry;  // e.g. "layer2.W_h[3,1]"
    bool ok = false;
};
// Central-difference check of model_backward in evaluation mode (no dropout).
GradCheckReport grad_check(const ModelParams& p, const Mat& window, double target,
                           double tol, double step = 1e-6, double l2 = 0.0);

}  // namespace cyclebench
