#include "cyclebench/rnn_cells.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cyclebench {

namespace {

inline Vec sigmoid(const Vec& a) {
    return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

inline Vec relu(const Vec& a) { return a.cwiseMax(0.0); }

// relu'(a), with relu'(0) = 0.
inline Vec relu_grad(const Vec& a) {
    return (a.array() > 0.0).cast<double>().matrix();
}

void check_shapes(Eigen::Index w, Eigen::Index d, const Vec& x, const Vec& h_prev,
                  const char* cell) {
    if (x.size() != d)
        throw std::invalid_argument(std::string(cell) + ": input has size " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(d));
    if (h_prev.size() != w)
        throw std::invalid_argument(std::string(cell) + ": hidden state has size " +
                                    std::to_string(h_prev.size()) + ", expected " +
                                    std::to_string(w));
}

}  // namespace

LstmParams LstmParams::zeros(Eigen::Index w, Eigen::Index d) {
    LstmParams p;
    p.U_f = Mat::Zero(w, d); p.U_i = Mat::Zero(w, d);
    p.U_o = Mat::Zero(w, d); p.U_c = Mat::Zero(w, d);
    p.W_f = Mat::Zero(w, w); p.W_i = Mat::Zero(w, w);
    p.W_o = Mat::Zero(w, w); p.W_c = Mat::Zero(w, w);
    p.b_f = Vec::Zero(w); p.b_i = Vec::Zero(w);
    p.b_o = Vec::Zero(w); p.b_c = Vec::Zero(w);
    return p;
}

GruParams GruParams::zeros(Eigen::Index w, Eigen::Index d) {
    GruParams p;
    p.U_r = Mat::Zero(w, d); p.U_z = Mat::Zero(w, d); p.U_h = Mat::Zero(w, d);
    p.W_r = Mat::Zero(w, w); p.W_z = Mat::Zero(w, w); p.W_h = Mat::Zero(w, w);
    p.b_r = Vec::Zero(w); p.b_z = Vec::Zero(w); p.b_h = Vec::Zero(w);
    return p;
}

void lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p,
               LstmHSource h_source, LstmStepCache& cache) {
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.f = sigmoid(p.U_f * x + p.W_f * h_prev + p.b_f);
    cache.i = sigmoid(p.U_i * x + p.W_i * h_prev + p.b_i);
    cache.o = sigmoid(p.U_o * x + p.W_o * h_prev + p.b_o);
    cache.a_c = p.U_c * x + p.W_c * h_prev + p.b_c;
    cache.c_tilde = relu(cache.a_c);
    cache.c = cache.c_tilde.cwiseProduct(cache.i) + c_prev.cwiseProduct(cache.f);
    if (h_source == LstmHSource::candidate)
        cache.h = relu(cache.c_tilde).cwiseProduct(cache.o);
    else
        cache.h = relu(cache.c).cwiseProduct(cache.o);
}

void gru_step(const Vec& x, const Vec& h_prev, const GruParams& p, GruStepCache& cache) {
    cache.x = x;
    cache.h_prev = h_prev;
    cache.r = sigmoid(p.U_r * x + p.W_r * h_prev + p.b_r);
    cache.z = sigmoid(p.U_z * x + p.W_z * h_prev + p.b_z);
    cache.rh = cache.r.cwiseProduct(h_prev);
    cache.a_h = p.U_h * x + p.W_h * cache.rh + p.b_h;
    cache.h_cand = relu(cache.a_h);
    cache.h = cache.z.cwiseProduct(h_prev) +
              (Vec::Ones(h_prev.size()) - cache.z).cwiseProduct(cache.h_cand);
}

CellState lstm_cell_forward(const Vec& x, const CellState& state, const LstmParams& p,
                            LstmHSource h_source) {
    check_shapes(p.width(), p.input_dim(), x, state.h, "lstm_cell_forward");
    if (state.c.size() != p.width())
        throw std::invalid_argument("lstm_cell_forward: cell state has size " +
                                    std::to_string(state.c.size()) + ", expected " +
                                    std::to_string(p.width()));
    LstmStepCache cache;
    lstm_step(x, state.h, state.c, p, h_source, cache);
    if (!cache.h.allFinite() || !cache.c.allFinite())
        throw std::runtime_error("lstm_cell_forward: non-finite state");
    return {cache.h, cache.c};
}

CellState gru_cell_forward(const Vec& x, const CellState& state, const GruParams& p) {
    check_shapes(p.width(), p.input_dim(), x, state.h, "gru_cell_forward");
    GruStepCache cache;
    gru_step(x, state.h, p, cache);
    if (!cache.h.allFinite())
        throw std::runtime_error("gru_cell_forward: non-finite state");
    return {cache.h, Vec()};
}

void lstm_step_backward(const LstmStepCache& cache, const LstmParams& p,
                        LstmHSource h_source, const Vec& dh, const Vec& dc_next,
                        LstmParams& g, Vec& dx, Vec& dh_prev, Vec& dc_prev) {
    const Eigen::Index w = p.width();
    Vec do_ = Vec::Zero(w);
    Vec dc_tilde = Vec::Zero(w);
    Vec dc = dc_next;
    if (h_source == LstmHSource::candidate) {
        // h = relu(c~) * o, and c~ = relu(a_c) >= 0, so relu(c~) = c~.
        do_ = dh.cwiseProduct(cache.c_tilde);
        dc_tilde = dh.cwiseProduct(cache.o).cwiseProduct(relu_grad(cache.c_tilde));
    } else {
        do_ = dh.cwiseProduct(cache.c.cwiseMax(0.0));
        dc += dh.cwiseProduct(cache.o).cwiseProduct(relu_grad(cache.c));
    }
    // c = c~ * i + c_prev * f
    dc_tilde += dc.cwiseProduct(cache.i);
    Vec di = dc.cwiseProduct(cache.c_tilde);
    Vec df = dc.cwiseProduct(cache.c_prev);
    dc_prev = dc.cwiseProduct(cache.f);

    Vec da_c = dc_tilde.cwiseProduct(relu_grad(cache.a_c));
    Vec da_f = df.cwiseProduct(cache.f).cwiseProduct(Vec::Ones(w) - cache.f);
    Vec da_i = di.cwiseProduct(cache.i).cwiseProduct(Vec::Ones(w) - cache.i);
    Vec da_o = do_.cwiseProduct(cache.o).cwiseProduct(Vec::Ones(w) - cache.o);

    g.U_f += da_f * cache.x.transpose();
    g.U_i += da_i * cache.x.transpose();
    g.U_o += da_o * cache.x.transpose();
    g.U_c += da_c * cache.x.transpose();
    g.W_f += da_f * cache.h_prev.transpose();
    g.W_i += da_i * cache.h_prev.transpose();
    g.W_o += da_o * cache.h_prev.transpose();
    g.W_c += da_c * cache.h_prev.transpose();
    g.b_f += da_f;
    g.b_i += da_i;
    g.b_o += da_o;
    g.b_c += da_c;

    dx = p.U_f.transpose() * da_f + p.U_i.transpose() * da_i +
         p.U_o.transpose() * da_o + p.U_c.transpose() * da_c;
    dh_prev = p.W_f.transpose() * da_f + p.W_i.transpose() * da_i +
              p.W_o.transpose() * da_o + p.W_c.transpose() * da_c;
}

void gru_step_backward(const GruStepCache& cache, const GruParams& p, const Vec& dh,
                       GruParams& g, Vec& dx, Vec& dh_prev) {
    const Eigen::Index w = p.width();
    // h = z * h_prev + (1 - z) * h'
    Vec dz = dh.cwiseProduct(cache.h_prev - cache.h_cand);
    Vec dh_cand = dh.cwiseProduct(Vec::Ones(w) - cache.z);
    dh_prev = dh.cwiseProduct(cache.z);

    Vec da_h = dh_cand.cwiseProduct(relu_grad(cache.a_h));
    Vec drh = p.W_h.transpose() * da_h;
    Vec dr = drh.cwiseProduct(cache.h_prev);
    dh_prev += drh.cwiseProduct(cache.r);

    Vec da_r = dr.cwiseProduct(cache.r).cwiseProduct(Vec::Ones(w) - cache.r);
    Vec da_z = dz.cwiseProduct(cache.z).cwiseProduct(Vec::Ones(w) - cache.z);

    g.U_r += da_r * cache.x.transpose();
    g.U_z += da_z * cache.x.transpose();
    g.U_h += da_h * cache.x.transpose();
    g.W_r += da_r * cache.h_prev.transpose();
    g.W_z += da_z * cache.h_prev.transpose();
    g.W_h += da_h * cache.rh.transpose();
    g.b_r += da_r;
    g.b_z += da_z;
    g.b_h += da_h;

    dx = p.U_r.transpose() * da_r + p.U_z.transpose() * da_z + p.U_h.transpose() * da_h;
    dh_prev += p.W_r.transpose() * da_r + p.W_z.transpose() * da_z;
}

std::vector<Vec> blstm_layer_forward(const std::vector<Vec>& seq, const LstmParams& p_fwd,
                                     const LstmParams& p_bwd, LstmHSource h_source) {
    const Eigen::Index w = p_fwd.width();
    if (p_bwd.width() != w || p_bwd.input_dim() != p_fwd.input_dim())
        throw std::invalid_argument("blstm_layer_forward: direction parameter shapes differ");
    const std::size_t n = seq.size();
    std::vector<Vec> out(n);
    LstmStepCache cache;
    Vec h = Vec::Zero(w), c = Vec::Zero(w);
    for (std::size_t t = 0; t < n; ++t) {
        lstm_step(seq[t], h, c, p_fwd, h_source, cache);
        h = cache.h;
        c = cache.c;
        out[t] = Vec(2 * w);
        out[t].head(w) = h;
    }
    h.setZero();
    c.setZero();
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t t = n - 1 - s;  // backward pass reads the sequence reversed
        lstm_step(seq[t], h, c, p_bwd, h_source, cache);
        h = cache.h;
        c = cache.c;
        out[t].tail(w) = h;
    }
    return out;
}

double dense_forward(const Vec& x, const Vec& w, double b) {
    if (x.size() != w.size())
        throw std::invalid_argument("dense_forward: size mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(w.size()) + ")");
    return w.dot(x) + b;
}

}  // namespace cyclebench
