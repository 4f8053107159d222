#include "cyclebench/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cyclebench {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::lstm: return "lstm";
        case ModelKind::blstm: return "blstm";
        case ModelKind::gru: return "gru";
    }
    throw std::invalid_argument("to_string: bad ModelKind");
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "lstm") return ModelKind::lstm;
    if (s == "blstm") return ModelKind::blstm;
    if (s == "gru") return ModelKind::gru;
    throw std::invalid_argument("unknown model kind '" + s + "' (expected lstm, blstm or gru)");
}

std::string to_string(LstmHSource s) {
    return s == LstmHSource::candidate ? "candidate" : "cell";
}

LstmHSource h_source_from_string(const std::string& s) {
    if (s == "candidate") return LstmHSource::candidate;
    if (s == "cell") return LstmHSource::cell;
    throw std::invalid_argument("unknown lstm_h_source '" + s +
                                "' (expected candidate or cell)");
}

namespace {

template <typename RefT, typename MP>
std::vector<RefT> refs_impl(MP& p) {
    std::vector<RefT> out;
    auto add_mat = [&out](const std::string& name, auto& m) {
        out.push_back(RefT{name, m.data(), m.rows(), m.cols()});
    };
    auto add_vec = [&out](const std::string& name, auto& v) {
        out.push_back(RefT{name, v.data(), v.size(), 1});
    };
    auto add_lstm = [&](const std::string& prefix, auto& q) {
        add_mat(prefix + ".U_f", q.U_f);
        add_mat(prefix + ".U_i", q.U_i);
        add_mat(prefix + ".U_o", q.U_o);
        add_mat(prefix + ".U_c", q.U_c);
        add_mat(prefix + ".W_f", q.W_f);
        add_mat(prefix + ".W_i", q.W_i);
        add_mat(prefix + ".W_o", q.W_o);
        add_mat(prefix + ".W_c", q.W_c);
        add_vec(prefix + ".b_f", q.b_f);
        add_vec(prefix + ".b_i", q.b_i);
        add_vec(prefix + ".b_o", q.b_o);
        add_vec(prefix + ".b_c", q.b_c);
    };
    auto add_gru = [&](const std::string& prefix, auto& q) {
        add_mat(prefix + ".U_r", q.U_r);
        add_mat(prefix + ".U_z", q.U_z);
        add_mat(prefix + ".U_h", q.U_h);
        add_mat(prefix + ".W_r", q.W_r);
        add_mat(prefix + ".W_z", q.W_z);
        add_mat(prefix + ".W_h", q.W_h);
        add_vec(prefix + ".b_r", q.b_r);
        add_vec(prefix + ".b_z", q.b_z);
        add_vec(prefix + ".b_h", q.b_h);
    };
    if (p.kind == ModelKind::gru) {
        add_gru("layer1", p.gru[0]);
        add_gru("layer2", p.gru[1]);
    } else if (p.kind == ModelKind::lstm) {
        add_lstm("layer1", p.lstm[0]);
        add_lstm("layer2", p.lstm[1]);
    } else {
        add_lstm("layer1.fwd", p.lstm[0]);
        add_lstm("layer1.bwd", p.lstm[1]);
        add_lstm("layer2.fwd", p.lstm[2]);
        add_lstm("layer2.bwd", p.lstm[3]);
    }
    add_vec("dense.w", p.dense_w);
    out.push_back(RefT{"dense.b", &p.dense_b, 1, 1});
    return out;
}

}  // namespace

std::vector<TensorRef> tensor_refs(ModelParams& p) { return refs_impl<TensorRef>(p); }
std::vector<ConstTensorRef> tensor_refs(const ModelParams& p) {
    return refs_impl<ConstTensorRef>(p);
}

Eigen::Index param_count(const ModelParams& p) {
    Eigen::Index n = 0;
    for (const auto& r : tensor_refs(p)) n += r.size();
    return n;
}

ModelParams make_model(ModelKind kind, int width, int input_dim, LstmHSource h_source) {
    if (width < 1 || input_dim < 1)
        throw std::invalid_argument("make_model: width and input_dim must be positive");
    ModelParams p;
    p.kind = kind;
    p.h_source = h_source;
    p.width = width;
    p.input_dim = input_dim;
    const Eigen::Index w = width, d = input_dim;
    if (kind == ModelKind::gru) {
        p.gru = {GruParams::zeros(w, d), GruParams::zeros(w, w)};
    } else if (kind == ModelKind::lstm) {
        p.lstm = {LstmParams::zeros(w, d), LstmParams::zeros(w, w)};
    } else {
        p.lstm = {LstmParams::zeros(w, d), LstmParams::zeros(w, d),
                  LstmParams::zeros(w, 2 * w), LstmParams::zeros(w, 2 * w)};
    }
    p.dense_w = Vec::Zero(p.dense_in());
    p.dense_b = 0.0;
    return p;
}

ModelParams zeros_like(const ModelParams& p) {
    return make_model(p.kind, p.width, p.input_dim, p.h_source);
}

ModelParams glorot_init(ModelKind kind, int width, int input_dim, Rng& rng,
                        LstmHSource h_source) {
    ModelParams p = make_model(kind, width, input_dim, h_source);
    for (auto& r : tensor_refs(p)) {
        const std::string leaf = r.name.substr(r.name.rfind('.') + 1);
        if (leaf[0] == 'b') continue;  // biases stay zero
        double fan_in, fan_out;
        if (leaf == "w") {  // dense weights
            fan_in = static_cast<double>(r.rows);
            fan_out = 1.0;
        } else {  // U_* (w x d) and W_* (w x w)
            fan_in = static_cast<double>(r.cols);
            fan_out = static_cast<double>(r.rows);
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index k = 0; k < r.size(); ++k)
            r.data[k] = rng.uniform(-limit, limit);
    }
    return p;
}

namespace {

struct LstmLayerCache {
    std::vector<LstmStepCache> steps;
};
struct GruLayerCache {
    std::vector<GruStepCache> steps;
};

std::vector<Vec> lstm_layer_fwd(const std::vector<Vec>& seq, const LstmParams& p,
                                LstmHSource hs, LstmLayerCache& cache) {
    const Eigen::Index w = p.width();
    const std::size_t n = seq.size();
    cache.steps.resize(n);
    std::vector<Vec> out(n);
    Vec h = Vec::Zero(w), c = Vec::Zero(w);
    for (std::size_t t = 0; t < n; ++t) {
        lstm_step(seq[t], h, c, p, hs, cache.steps[t]);
        h = cache.steps[t].h;
        c = cache.steps[t].c;
        out[t] = h;
    }
    return out;
}

std::vector<Vec> lstm_layer_bwd(const LstmLayerCache& cache, const LstmParams& p,
                                LstmHSource hs, const std::vector<Vec>& dh_out,
                                LstmParams& g) {
    const Eigen::Index w = p.width();
    const std::size_t n = cache.steps.size();
    std::vector<Vec> dx(n);
    Vec dh_rec = Vec::Zero(w), dc_rec = Vec::Zero(w);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t t = n - 1 - s;
        Vec dh = dh_out[t] + dh_rec;
        Vec dh_prev, dc_prev;
        lstm_step_backward(cache.steps[t], p, hs, dh, dc_rec, g, dx[t], dh_prev, dc_prev);
        dh_rec = std::move(dh_prev);
        dc_rec = std::move(dc_prev);
    }
    return dx;
}

std::vector<Vec> gru_layer_fwd(const std::vector<Vec>& seq, const GruParams& p,
                               GruLayerCache& cache) {
    const Eigen::Index w = p.width();
    const std::size_t n = seq.size();
    cache.steps.resize(n);
    std::vector<Vec> out(n);
    Vec h = Vec::Zero(w);
    for (std::size_t t = 0; t < n; ++t) {
        gru_step(seq[t], h, p, cache.steps[t]);
        h = cache.steps[t].h;
        out[t] = h;
    }
    return out;
}

std::vector<Vec> gru_layer_bwd(const GruLayerCache& cache, const GruParams& p,
                               const std::vector<Vec>& dh_out, GruParams& g) {
    const Eigen::Index w = p.width();
    const std::size_t n = cache.steps.size();
    std::vector<Vec> dx(n);
    Vec dh_rec = Vec::Zero(w);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t t = n - 1 - s;
        Vec dh = dh_out[t] + dh_rec;
        Vec dh_prev;
        gru_step_backward(cache.steps[t], p, dh, g, dx[t], dh_prev);
        dh_rec = std::move(dh_prev);
    }
    return dx;
}

// Both directions of one bidirectional layer. The backward direction consumes
// the reversed sequence, so its step s corresponds to position n-1-s.
struct BlstmLayerCache {
    LstmLayerCache fwd, bwd;
};

std::vector<Vec> blstm_layer_fwd(const std::vector<Vec>& seq, const LstmParams& pf,
                                 const LstmParams& pb, LstmHSource hs,
                                 BlstmLayerCache& cache) {
    const Eigen::Index w = pf.width();
    const std::size_t n = seq.size();
    std::vector<Vec> hf = lstm_layer_fwd(seq, pf, hs, cache.fwd);
    std::vector<Vec> rev(n);
    for (std::size_t s = 0; s < n; ++s) rev[s] = seq[n - 1 - s];
    std::vector<Vec> hb = lstm_layer_fwd(rev, pb, hs, cache.bwd);
    std::vector<Vec> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = Vec(2 * w);
        out[t].head(w) = hf[t];
        out[t].tail(w) = hb[n - 1 - t];
    }
    return out;
}

std::vector<Vec> blstm_layer_bwd(const BlstmLayerCache& cache, const LstmParams& pf,
                                 const LstmParams& pb, LstmHSource hs,
                                 const std::vector<Vec>& dh_out, LstmParams& gf,
                                 LstmParams& gb) {
    const Eigen::Index w = pf.width();
    const std::size_t n = cache.fwd.steps.size();
    std::vector<Vec> dhf(n), dhb(n);
    for (std::size_t t = 0; t < n; ++t) {
        dhf[t] = dh_out[t].head(w);
        dhb[n - 1 - t] = dh_out[t].tail(w);
    }
    std::vector<Vec> dxf = lstm_layer_bwd(cache.fwd, pf, hs, dhf, gf);
    std::vector<Vec> dxb = lstm_layer_bwd(cache.bwd, pb, hs, dhb, gb);
    std::vector<Vec> dx(n);
    for (std::size_t t = 0; t < n; ++t) dx[t] = dxf[t] + dxb[n - 1 - t];
    return dx;
}

struct ModelCaches {
    LstmLayerCache l1_lstm, l2_lstm;
    GruLayerCache l1_gru, l2_gru;
    BlstmLayerCache l1_blstm, l2_blstm;
    Mat mask;              // steps x mid width; empty when dropout is off
    std::vector<Vec> mid;  // layer-2 inputs (after dropout)
    Vec last;              // layer-2 output at the final step
};

double forward_impl(const Mat& window, const ModelParams& p, bool train, Rng* rng,
                    double rate, ModelCaches& mc) {
    if (window.cols() != p.input_dim)
        throw std::invalid_argument("model_forward: window has " +
                                    std::to_string(window.cols()) + " columns, expected " +
                                    std::to_string(p.input_dim));
    if (window.rows() < 1)
        throw std::invalid_argument("model_forward: empty window");
    if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("model_forward: dropout rate must be in [0, 1)");
    const bool drop = train && rate > 0.0;
    if (drop && rng == nullptr)
        throw std::invalid_argument("model_forward: dropout requires an rng");

    const std::size_t n = static_cast<std::size_t>(window.rows());
    std::vector<Vec> seq(n);
    for (std::size_t t = 0; t < n; ++t) seq[t] = window.row(static_cast<Eigen::Index>(t)).transpose();

    std::vector<Vec> out1;
    if (p.kind == ModelKind::gru)
        out1 = gru_layer_fwd(seq, p.gru[0], mc.l1_gru);
    else if (p.kind == ModelKind::lstm)
        out1 = lstm_layer_fwd(seq, p.lstm[0], p.h_source, mc.l1_lstm);
    else
        out1 = blstm_layer_fwd(seq, p.lstm[0], p.lstm[1], p.h_source, mc.l1_blstm);

    // Inverted dropout: draw per (step, unit) in step-major order, keep with
    // probability 1-rate and scale kept activations by 1/(1-rate).
    mc.mid.resize(n);
    if (drop) {
        const Eigen::Index m = out1[0].size();
        const double scale = 1.0 / (1.0 - rate);
        mc.mask = Mat::Zero(static_cast<Eigen::Index>(n), m);
        for (std::size_t t = 0; t < n; ++t)
            for (Eigen::Index j = 0; j < m; ++j)
                if (rng->uniform() >= rate) mc.mask(static_cast<Eigen::Index>(t), j) = scale;
        for (std::size_t t = 0; t < n; ++t)
            mc.mid[t] = out1[t].cwiseProduct(mc.mask.row(static_cast<Eigen::Index>(t)).transpose());
    } else {
        mc.mask.resize(0, 0);
        mc.mid = out1;
    }

    std::vector<Vec> out2;
    if (p.kind == ModelKind::gru)
        out2 = gru_layer_fwd(mc.mid, p.gru[1], mc.l2_gru);
    else if (p.kind == ModelKind::lstm)
        out2 = lstm_layer_fwd(mc.mid, p.lstm[1], p.h_source, mc.l2_lstm);
    else
        out2 = blstm_layer_fwd(mc.mid, p.lstm[2], p.lstm[3], p.h_source, mc.l2_blstm);

    mc.last = out2[n - 1];
    return dense_forward(mc.last, p.dense_w, p.dense_b);
}

}  // namespace

double model_forward(const Mat& window, const ModelParams& p, bool train, Rng* rng,
                     double dropout_rate) {
    ModelCaches mc;
    return forward_impl(window, p, train, rng, dropout_rate, mc);
}

BackwardResult model_backward(const Mat& window, double target, const ModelParams& p,
                              bool train, Rng* rng, double dropout_rate, double l2) {
    ModelCaches mc;
    BackwardResult res;
    res.pred = forward_impl(window, p, train, rng, dropout_rate, mc);
    res.grads = zeros_like(p);
    ModelParams& g = res.grads;

    const double err = res.pred - target;
    const std::size_t n = static_cast<std::size_t>(window.rows());
    const double dpred = 2.0 * err;

    g.dense_w = dpred * mc.last;
    g.dense_b = dpred;
    Vec dlast = dpred * p.dense_w;

    std::vector<Vec> dh2(n, Vec::Zero(p.dense_in()));
    dh2[n - 1] = dlast;
    std::vector<Vec> dmid;
    if (p.kind == ModelKind::gru)
        dmid = gru_layer_bwd(mc.l2_gru, p.gru[1], dh2, g.gru[1]);
    else if (p.kind == ModelKind::lstm)
        dmid = lstm_layer_bwd(mc.l2_lstm, p.lstm[1], p.h_source, dh2, g.lstm[1]);
    else
        dmid = blstm_layer_bwd(mc.l2_blstm, p.lstm[2], p.lstm[3], p.h_source, dh2,
                               g.lstm[2], g.lstm[3]);

    std::vector<Vec> dout1(n);
    if (mc.mask.size() > 0) {
        for (std::size_t t = 0; t < n; ++t)
            dout1[t] = dmid[t].cwiseProduct(mc.mask.row(static_cast<Eigen::Index>(t)).transpose());
    } else {
        dout1 = dmid;
    }

    if (p.kind == ModelKind::gru)
        gru_layer_bwd(mc.l1_gru, p.gru[0], dout1, g.gru[0]);
    else if (p.kind == ModelKind::lstm)
        lstm_layer_bwd(mc.l1_lstm, p.lstm[0], p.h_source, dout1, g.lstm[0]);
    else
        blstm_layer_bwd(mc.l1_blstm, p.lstm[0], p.lstm[1], p.h_source, dout1,
                        g.lstm[0], g.lstm[1]);

    res.loss = err * err;
    if (l2 != 0.0) {
        auto prefs = tensor_refs(p);
        auto grefs = tensor_refs(g);
        double sumsq = 0.0;
        for (std::size_t k = 0; k < prefs.size(); ++k) {
            for (Eigen::Index idx = 0; idx < prefs[k].size(); ++idx) {
                const double v = prefs[k].data[idx];
                sumsq += v * v;
                grefs[k].data[idx] += 2.0 * l2 * v;
            }
        }
        res.loss += l2 * sumsq;
    }
    return res;
}

namespace {

double eval_loss(const Mat& window, double target, const ModelParams& p, double l2) {
    const double pred = model_forward(window, p, false, nullptr, 0.0);
    double loss = (pred - target) * (pred - target);
    if (l2 != 0.0) {
        double sumsq = 0.0;
        for (const auto& r : tensor_refs(p))
            for (Eigen::Index idx = 0; idx < r.size(); ++idx)
                sumsq += r.data[idx] * r.data[idx];
        loss += l2 * sumsq;
    }
    return loss;
}

}  // namespace

GradCheckReport grad_check(const ModelParams& p, const Mat& window, double target,
                           double tol, double step, double l2) {
    BackwardResult base = model_backward(window, target, p, false, nullptr, 0.0, l2);
    ModelParams probe = p;
    auto refs = tensor_refs(probe);
    auto grefs = tensor_refs(base.grads);
    GradCheckReport report;
    for (std::size_t k = 0; k < refs.size(); ++k) {
        for (Eigen::Index idx = 0; idx < refs[k].size(); ++idx) {
            const double orig = refs[k].data[idx];
            refs[k].data[idx] = orig + step;
            const double lp = eval_loss(window, target, probe, l2);
            refs[k].data[idx] = orig - step;
            const double lm = eval_loss(window, target, probe, l2);
            refs[k].data[idx] = orig;
            const double num = (lp - lm) / (2.0 * step);
            const double ana = grefs[k].data[idx];
            const double rel = std::abs(num - ana) / std::max(1e-6, std::abs(num) + std::abs(ana));
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                char buf[64];
                if (refs[k].cols == 1)
                    std::snprintf(buf, sizeof(buf), "[%lld]", static_cast<long long>(idx));
                else
                    std::snprintf(buf, sizeof(buf), "[%lld,%lld]",
                                  static_cast<long long>(idx % refs[k].rows),
                                  static_cast<long long>(idx / refs[k].rows));
                report.worst_entry = refs[k].name + buf;
            }
        }
    }
    report.ok = report.max_rel_err <= tol;
    return report;
}

}  // namespace cyclebench
