#pragma once
// The three recurrent cells, written exactly as the forward equations
// define them, plus the per-step reverse-mode primitives BPTT composes.
//
// LSTM step (gate order f, i, o, candidate c~):
//   f = sigmoid(U_f x + W_f h_prev + b_f)
//   i = sigmoid(U_i x + W_i h_prev + b_i)
//   o = sigmoid(U_o x + W_o h_prev + b_o)
//   c~ = relu(U_c x + W_c h_prev + b_c)
//   c  = c~ * i + c_prev * f
//   h  = relu(c~) * o        [h_source = candidate, the printed form]
//   h  = relu(c)  * o        [h_source = cell, conventional variant]
//
// GRU step:
//   r  = sigmoid(U_r x + W_r h_prev + b_r)
//   z  = sigmoid(U_z x + W_z h_prev + b_z)
//   h' = relu(U_h x + W_h (r * h_prev) + b_h)
//   h  = z * h_prev + (1 - z) * h'
//
// relu'(0) is taken as 0 throughout.

#include <vector>

#include <Eigen/Core>

namespace cyclebench {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class LstmHSource {
    candidate,  // default: the equations as printed
    cell,       // conventional variant
};

struct CellState {
    Vec h;  // width w
    Vec c;  // width w, LSTM only (empty for GRU)
    static CellState zero_lstm(Eigen::Index w) { return {Vec::Zero(w), Vec::Zero(w)}; }
    static CellState zero_gru(Eigen::Index w) { return {Vec::Zero(w), Vec()}; }
};

struct LstmParams {
    Mat U_f, U_i, U_o, U_c;  // w x d
    Mat W_f, W_i, W_o, W_c;  // w x w
    Vec b_f, b_i, b_o, b_c;  // w
    Eigen::Index width() const { return W_f.rows(); }
    Eigen::Index input_dim() const { return U_f.cols(); }
    static LstmParams zeros(Eigen::Index w, Eigen::Index d);
};

struct GruParams {
    Mat U_r, U_z, U_h;  // w x d
    Mat W_r, W_z, W_h;  // w x w
    Vec b_r, b_z, b_h;  // w
    Eigen::Index width() const { return W_r.rows(); }
    Eigen::Index input_dim() const { return U_r.cols(); }
    static GruParams zeros(Eigen::Index w, Eigen::Index d);
};

// Activations kept per step for the backward pass.
struct LstmStepCache {
    Vec x, h_prev, c_prev;
    Vec f, i, o, a_c, c_tilde, c, h;
};
struct GruStepCache {
    Vec x, h_prev;
    Vec r, z, rh, a_h, h_cand, h;
};

// Public single steps; validate shapes and finiteness.
CellState lstm_cell_forward(const Vec& x, const CellState& state, const LstmParams& p,
                            LstmHSource h_source = LstmHSource::candidate);
CellState gru_cell_forward(const Vec& x, const CellState& state, const GruParams& p);

// Unchecked fast paths used by the layer loops.
void lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p,
               LstmHSource h_source, LstmStepCache& cache);
void gru_step(const Vec& x, const Vec& h_prev, const GruParams& p, GruStepCache& cache);

// Reverse-mode single steps. dh is dL/dh at this step, dc_next the cell-state
// gradient flowing back from step t+1 (LSTM). Parameter gradients accumulate
// into g; dx/dh_prev/dc_prev receive the input-side gradients.
void lstm_step_backward(const LstmStepCache& cache, const LstmParams& p,
                        LstmHSource h_source, const Vec& dh, const Vec& dc_next,
                        LstmParams& g, Vec& dx, Vec& dh_prev, Vec& dc_prev);
void gru_step_backward(const GruStepCache& cache, const GruParams& p, const Vec& dh,
                       GruParams& g, Vec& dx, Vec& dh_prev);

// BLSTM layer: forward pass over seq, second pass over the reversed
// sequence, outputs concatenated per step [h_fwd ; h_bwd].
std::vector<Vec> blstm_layer_forward(const std::vector<Vec>& seq, const LstmParams& p_fwd,
                                     const LstmParams& p_bwd,
                                     LstmHSource h_source = LstmHSource::candidate);

// y = w^T x + b.
double dense_forward(const Vec& x, const Vec& w, double b);

}  // namespace cyclebench
