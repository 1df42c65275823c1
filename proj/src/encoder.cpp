#include "gtr/encoder.hpp"

#include <cmath>
#include <iostream>

#include "gtr/rng.hpp"

namespace gtr {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

Arch arch_from_string(const std::string& s) {
    if (s == "transformer") return Arch::transformer;
    if (s == "bag_mlp") return Arch::bag_mlp;
    throw Error("invalid_config: unknown arch '" + s + "'");
}

std::string arch_to_string(Arch a) {
    return a == Arch::transformer ? "transformer" : "bag_mlp";
}

void EncoderConfig::validate() const {
    if (vocab_size < 2) throw Error("invalid_config: vocab_size must be >= 2");
    if (model_dim < 1 || ffn_dim < 1 || bottleneck_dim < 1 || max_len < 1)
        throw Error("invalid_config: dimensions must be >= 1");
    if (num_layers < 0) throw Error("invalid_config: num_layers must be >= 0");
    if (arch == Arch::transformer) {
        if (num_heads < 1) throw Error("invalid_config: num_heads must be >= 1");
        if (model_dim % num_heads != 0)
            throw Error("invalid_config: model_dim " + std::to_string(model_dim) +
                        " not divisible by num_heads " + std::to_string(num_heads));
    }
}

int64_t count_params(const EncoderConfig& c) {
    c.validate();
    int64_t n = c.vocab_size * c.model_dim;  // embedding
    const int64_t d = c.model_dim, f = c.ffn_dim;
    if (c.arch == Arch::transformer) {
        int64_t per_layer = 4 * d            // two layer norms, gain + bias
                            + 4 * d * d      // q, k, v, o projections
                            + d * f + f      // ffn in
                            + f * d + d;     // ffn out
        n += c.num_layers * per_layer;
        if (c.num_layers > 0) n += 2 * d;    // final layer norm
    } else {
        n += d * f + f + f * d + d;          // pooled-embedding mlp
    }
    n += d * c.bottleneck_dim;               // bottleneck projection
    return n;
}

namespace {

Mat<float> init_weight(Rng& rng, int64_t rows, int64_t cols, int64_t fan_in) {
    Mat<float> m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : m.data) v = static_cast<float>(rng.truncated_normal() * scale);
    return m;
}

Mat<float> init_const(int64_t rows, int64_t cols, float value) {
    Mat<float> m(rows, cols);
    m.fill(value);
    return m;
}

}  // namespace

ParamSet init_params(const EncoderConfig& c, uint64_t seed) {
    c.validate();
    Rng rng(seed);
    ParamSet p;
    const int64_t d = c.model_dim, f = c.ffn_dim;
    p.embedding = init_weight(rng, c.vocab_size, d, d);
    if (c.arch == Arch::transformer) {
        p.layers.resize(c.num_layers);
        for (auto& lp : p.layers) {
            lp.ln1_gain = init_const(1, d, 1.0f);
            lp.ln1_bias = init_const(1, d, 0.0f);
            lp.wq = init_weight(rng, d, d, d);
            lp.wk = init_weight(rng, d, d, d);
            lp.wv = init_weight(rng, d, d, d);
            lp.wo = init_weight(rng, d, d, d);
            lp.ln2_gain = init_const(1, d, 1.0f);
            lp.ln2_bias = init_const(1, d, 0.0f);
            lp.w1 = init_weight(rng, d, f, d);
            lp.b1 = init_const(1, f, 0.0f);
            lp.w2 = init_weight(rng, f, d, f);
            lp.b2 = init_const(1, d, 0.0f);
        }
        if (c.num_layers > 0) {
            p.final_ln_gain = init_const(1, d, 1.0f);
            p.final_ln_bias = init_const(1, d, 0.0f);
        }
    } else {
        p.mlp_w1 = init_weight(rng, d, f, d);
        p.mlp_b1 = init_const(1, f, 0.0f);
        p.mlp_w2 = init_weight(rng, f, d, f);
        p.mlp_b2 = init_const(1, d, 0.0f);
    }
    p.projection = init_weight(rng, d, c.bottleneck_dim, d);
    return p;
}

// ---- forward / backward ----

namespace {

template <typename T>
T gelu(T x) {
    return T(0.5) * x * (T(1) + std::erf(x * T(M_SQRT1_2)));
}

template <typename T>
T gelu_grad(T x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return T(0.5) * (T(1) + std::erf(x * T(M_SQRT1_2))) +
           x * T(inv_sqrt_2pi) * std::exp(T(-0.5) * x * x);
}

/// Sinusoidal position table, [max_len x d].
template <typename T>
Mat<T> position_table(int64_t max_len, int64_t d) {
    Mat<T> pos(max_len, d);
    for (int64_t t = 0; t < max_len; ++t) {
        for (int64_t i = 0; i < d; ++i) {
            double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d);
            double angle = static_cast<double>(t) / std::pow(10000.0, exponent);
            pos.at(t, i) = static_cast<T>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
        }
    }
    return pos;
}

/// y = gain * (x - mean)/sqrt(var + eps) + bias, row-wise over [L x d].
template <typename T>
void layer_norm_fwd(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias, Mat<T>& y,
                    LayerNormTrace<T>& tr) {
    const int64_t L = x.rows, d = x.cols;
    y = Mat<T>(L, d);
    tr.xhat = Mat<T>(L, d);
    tr.rstd.assign(L, T(0));
    for (int64_t t = 0; t < L; ++t) {
        const T* xr = x.row(t);
        T mean = 0;
        for (int64_t i = 0; i < d; ++i) mean += xr[i];
        mean /= static_cast<T>(d);
        T var = 0;
        for (int64_t i = 0; i < d; ++i) {
            T dv = xr[i] - mean;
            var += dv * dv;
        }
        var /= static_cast<T>(d);
        T rstd = T(1) / std::sqrt(var + T(kLayerNormEps));
        tr.rstd[t] = rstd;
        T* xh = tr.xhat.row(t);
        T* yr = y.row(t);
        for (int64_t i = 0; i < d; ++i) {
            xh[i] = (xr[i] - mean) * rstd;
            yr[i] = gain.data[i] * xh[i] + bias.data[i];
        }
    }
}

template <typename T>
void layer_norm_bwd(const Mat<T>& dy, const Mat<T>& gain, const LayerNormTrace<T>& tr, Mat<T>& dx,
                    Mat<T>& dgain, Mat<T>& dbias) {
    const int64_t L = dy.rows, d = dy.cols;
    dx = Mat<T>(L, d);
    for (int64_t t = 0; t < L; ++t) {
        const T* dyr = dy.row(t);
        const T* xh = tr.xhat.row(t);
        T* dxr = dx.row(t);
        T sum_dxhat = 0, sum_dxhat_xhat = 0;
        for (int64_t i = 0; i < d; ++i) {
            T dxhat = dyr[i] * gain.data[i];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xh[i];
            dgain.data[i] += dyr[i] * xh[i];
            dbias.data[i] += dyr[i];
        }
        T inv_d = T(1) / static_cast<T>(d);
        for (int64_t i = 0; i < d; ++i) {
            T dxhat = dyr[i] * gain.data[i];
            dxr[i] = tr.rstd[t] * (dxhat - inv_d * sum_dxhat - xh[i] * inv_d * sum_dxhat_xhat);
        }
    }
}

/// x @ w + bias (bias optional, 1 x cols).
template <typename T>
void linear_fwd(const Mat<T>& x, const Mat<T>& w, const Mat<T>* bias, Mat<T>& y) {
    matmul_serial(x, w, y);
    if (bias != nullptr)
        for (int64_t t = 0; t < y.rows; ++t) {
            T* yr = y.row(t);
            for (int64_t j = 0; j < y.cols; ++j) yr[j] += bias->data[j];
        }
}

template <typename T>
void linear_bwd(const Mat<T>& x, const Mat<T>& w, const Mat<T>& dy, Mat<T>& dx, Mat<T>& dw,
                Mat<T>* dbias) {
    matmul_bt(dy, w, dx);              // dx = dy @ w^T  (w^T rows are w columns)
    matmul_at_b_add(x, dy, dw);        // dw += x^T @ dy
    if (dbias != nullptr)
        for (int64_t t = 0; t < dy.rows; ++t) {
            const T* dyr = dy.row(t);
            for (int64_t j = 0; j < dy.cols; ++j) dbias->data[j] += dyr[j];
        }
}

template <typename T>
void attention_fwd(const LayerParamsT<T>& lp, const EncoderConfig& c,
                   const Mat<T>& h, int64_t valid_len, AttentionTrace<T>& tr, Mat<T>& out) {
    const int64_t L = h.rows, d = c.model_dim, H = c.num_heads, dh = d / H;
    matmul_serial(h, lp.wq, tr.q);
    matmul_serial(h, lp.wk, tr.k);
    matmul_serial(h, lp.wv, tr.v);
    tr.weights = Mat<T>(H * L, L);
    tr.ctx = Mat<T>(L, d);
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    std::vector<T> logits(L);
    for (int64_t head = 0; head < H; ++head) {
        const int64_t off = head * dh;
        for (int64_t t = 0; t < L; ++t) {
            const T* qr = tr.q.row(t) + off;
            T maxv = T(0);
            bool any = valid_len > 0;
            for (int64_t s = 0; s < valid_len; ++s) {
                T logit = 0;
                const T* kr = tr.k.row(s) + off;
                for (int64_t i = 0; i < dh; ++i) logit += qr[i] * kr[i];
                logit *= scale;
                logits[s] = logit;
                if (s == 0 || logit > maxv) maxv = logit;
            }
            T* wr = tr.weights.row(head * L + t);
            if (!any) continue;  // all-pad sequence: weights stay zero
            T denom = 0;
            for (int64_t s = 0; s < valid_len; ++s) {
                T e = std::exp(logits[s] - maxv);
                wr[s] = e;
                denom += e;
            }
            T inv = T(1) / denom;
            T* cr = tr.ctx.row(t) + off;
            for (int64_t s = 0; s < valid_len; ++s) {
                wr[s] *= inv;
                const T* vr = tr.v.row(s) + off;
                for (int64_t i = 0; i < dh; ++i) cr[i] += wr[s] * vr[i];
            }
        }
    }
    matmul_serial(tr.ctx, lp.wo, out);
}

template <typename T>
void attention_bwd(const LayerParamsT<T>& lp, const EncoderConfig& c, const Mat<T>& h,
                   int64_t valid_len, const AttentionTrace<T>& tr, const Mat<T>& dout,
                   Mat<T>& dh_out, LayerParamsT<T>& g) {
    const int64_t L = h.rows, d = c.model_dim, H = c.num_heads, dh = d / H;
    Mat<T> dctx;
    matmul_bt(dout, lp.wo, dctx);        // dctx = dout @ wo^T
    matmul_at_b_add(tr.ctx, dout, g.wo); // gwo += ctx^T @ dout

    Mat<T> dq(L, d), dk(L, d), dv(L, d);
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));
    std::vector<T> dw(L);
    for (int64_t head = 0; head < H; ++head) {
        const int64_t off = head * dh;
        for (int64_t t = 0; t < L; ++t) {
            const T* wr = tr.weights.row(head * L + t);
            const T* dcr = dctx.row(t) + off;
            // dv and d(weights)
            T dot_wd = 0;
            for (int64_t s = 0; s < valid_len; ++s) {
                const T* vr = tr.v.row(s) + off;
                T dws = 0;
                for (int64_t i = 0; i < dh; ++i) dws += dcr[i] * vr[i];
                dw[s] = dws;
                dot_wd += dws * wr[s];
                T* dvr = dv.row(s) + off;
                for (int64_t i = 0; i < dh; ++i) dvr[i] += wr[s] * dcr[i];
            }
            // softmax backward, then into q and k
            T* dqr = dq.row(t) + off;
            const T* qr = tr.q.row(t) + off;
            for (int64_t s = 0; s < valid_len; ++s) {
                T dlogit = wr[s] * (dw[s] - dot_wd) * scale;
                const T* kr = tr.k.row(s) + off;
                T* dkr = dk.row(s) + off;
                for (int64_t i = 0; i < dh; ++i) {
                    dqr[i] += dlogit * kr[i];
                    dkr[i] += dlogit * qr[i];
                }
            }
        }
    }
    Mat<T> tmp;
    matmul_bt(dq, lp.wq, tmp);
    dh_out = tmp;
    matmul_bt(dk, lp.wk, tmp);
    for (size_t i = 0; i < dh_out.data.size(); ++i) dh_out.data[i] += tmp.data[i];
    matmul_bt(dv, lp.wv, tmp);
    for (size_t i = 0; i < dh_out.data.size(); ++i) dh_out.data[i] += tmp.data[i];
    matmul_at_b_add(h, dq, g.wq);
    matmul_at_b_add(h, dk, g.wk);
    matmul_at_b_add(h, dv, g.wv);
}

template <typename T>
void check_sequence(const EncoderConfig& c, const TokenSequence& seq) {
    if (seq.max_len > c.max_len)
        throw Error("invalid_sequence: max_len " + std::to_string(seq.max_len) + " exceeds config max_len " +
                    std::to_string(c.max_len));
    if (static_cast<int64_t>(seq.ids.size()) != seq.max_len)
        throw Error("invalid_sequence: ids size != max_len");
    for (int32_t id : seq.ids)
        if (id < 0 || id >= c.vocab_size)
            throw Error("invalid_token: id " + std::to_string(id) + " outside vocab of size " +
                        std::to_string(c.vocab_size));
}

}  // namespace

template <typename T>
EncodeTrace<T> encode_forward_one(const ParamSetT<T>& p, const EncoderConfig& c,
                                  const TokenSequence& seq) {
    check_sequence<T>(c, seq);
    const int64_t L = seq.max_len, d = c.model_dim;
    EncodeTrace<T> tr;
    tr.seq = seq;

    tr.x0 = Mat<T>(L, d);
    for (int64_t t = 0; t < L; ++t) {
        const T* er = p.embedding.row(seq.ids[t]);
        T* xr = tr.x0.row(t);
        for (int64_t i = 0; i < d; ++i) xr[i] = er[i];
    }

    if (c.arch == Arch::transformer) {
        if (c.num_layers > 0) {
            // positions feed attention; the 0-layer model stays a pure bag
            static thread_local Mat<T> pos_cache;
            if (pos_cache.rows < L || pos_cache.cols != d) pos_cache = position_table<T>(c.max_len, d);
            for (int64_t t = 0; t < L; ++t) {
                const T* pr = pos_cache.row(t);
                T* xr = tr.x0.row(t);
                for (int64_t i = 0; i < d; ++i) xr[i] += pr[i];
            }
        }
        Mat<T> x = tr.x0;
        tr.layers.resize(c.num_layers);
        for (int64_t l = 0; l < c.num_layers; ++l) {
            auto& lt = tr.layers[l];
            const auto& lp = p.layers[l];
            lt.x_in = x;
            layer_norm_fwd(x, lp.ln1_gain, lp.ln1_bias, lt.ln1_out, lt.ln1);
            Mat<T> attn_out;
            attention_fwd(lp, c, lt.ln1_out, seq.length, lt.attn, attn_out);
            lt.x_mid = x;
            for (size_t i = 0; i < lt.x_mid.data.size(); ++i) lt.x_mid.data[i] += attn_out.data[i];
            layer_norm_fwd(lt.x_mid, lp.ln2_gain, lp.ln2_bias, lt.ln2_out, lt.ln2);
            linear_fwd(lt.ln2_out, lp.w1, &lp.b1, lt.f1);
            lt.g = lt.f1;
            for (auto& v : lt.g.data) v = gelu(v);
            Mat<T> f2;
            linear_fwd(lt.g, lp.w2, &lp.b2, f2);
            x = lt.x_mid;
            for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += f2.data[i];
        }
        if (c.num_layers > 0) {
            tr.x_final_in = x;
            layer_norm_fwd(x, p.final_ln_gain, p.final_ln_bias, tr.x_out, tr.final_ln);
        } else {
            tr.x_out = x;
        }
        tr.pooled = Mat<T>(1, d);
        const T inv = T(1) / static_cast<T>(std::max<int64_t>(seq.length, 1));
        for (int64_t t = 0; t < seq.length; ++t) {
            const T* xr = tr.x_out.row(t);
            for (int64_t i = 0; i < d; ++i) tr.pooled.data[i] += xr[i] * inv;
        }
    } else {
        // bag_mlp: mask-mean of embeddings, then a 2-layer mlp
        Mat<T> mean(1, d);
        const T inv = T(1) / static_cast<T>(std::max<int64_t>(seq.length, 1));
        for (int64_t t = 0; t < seq.length; ++t) {
            const T* xr = tr.x0.row(t);
            for (int64_t i = 0; i < d; ++i) mean.data[i] += xr[i] * inv;
        }
        tr.x_out = mean;
        linear_fwd(mean, p.mlp_w1, &p.mlp_b1, tr.mlp_f1);
        tr.mlp_g = tr.mlp_f1;
        for (auto& v : tr.mlp_g.data) v = gelu(v);
        linear_fwd(tr.mlp_g, p.mlp_w2, &p.mlp_b2, tr.pooled);
    }

    matmul_serial(tr.pooled, p.projection, tr.z);
    tr.z_norm = static_cast<T>(std::sqrt(squared_l2(tr.z.data.data(), tr.z.cols)));
    tr.out = Mat<T>(1, c.bottleneck_dim);
    if (tr.z_norm > T(0)) {
        for (int64_t j = 0; j < c.bottleneck_dim; ++j) tr.out.data[j] = tr.z.data[j] / tr.z_norm;
    } else {
        std::cerr << "warning: zero-norm embedding, emitting first-basis unit vector\n";
        tr.out.data[0] = T(1);
    }
    return tr;
}

template <typename T>
void encode_backward_one(const ParamSetT<T>& p, const EncoderConfig& c, const EncodeTrace<T>& tr,
                         const T* upstream, ParamSetT<T>& g) {
    const int64_t d = c.model_dim, b = c.bottleneck_dim;
    const TokenSequence& seq = tr.seq;
    const int64_t L = seq.max_len;

    // through L2 normalization: dz = (u - (u . out) out) / norm
    Mat<T> dz(1, b);
    if (tr.z_norm > T(0)) {
        T u_dot_out = 0;
        for (int64_t j = 0; j < b; ++j) u_dot_out += upstream[j] * tr.out.data[j];
        const T inv = T(1) / tr.z_norm;
        for (int64_t j = 0; j < b; ++j) dz.data[j] = (upstream[j] - u_dot_out * tr.out.data[j]) * inv;
    }  // zero-norm fallback is constant; gradient stays zero

    Mat<T> dpooled;
    linear_bwd(tr.pooled, p.projection, dz, dpooled, g.projection, static_cast<Mat<T>*>(nullptr));

    if (c.arch == Arch::bag_mlp) {
        Mat<T> dg;
        linear_bwd(tr.mlp_g, p.mlp_w2, dpooled, dg, g.mlp_w2, &g.mlp_b2);
        for (int64_t j = 0; j < dg.cols; ++j) dg.data[j] *= gelu_grad(tr.mlp_f1.data[j]);
        Mat<T> dmean;
        linear_bwd(tr.x_out, p.mlp_w1, dg, dmean, g.mlp_w1, &g.mlp_b1);
        const T inv = T(1) / static_cast<T>(std::max<int64_t>(seq.length, 1));
        for (int64_t t = 0; t < seq.length; ++t) {
            T* er = g.embedding.row(seq.ids[t]);
            for (int64_t i = 0; i < d; ++i) er[i] += dmean.data[i] * inv;
        }
        return;
    }

    // scatter pooled gradient over valid positions
    Mat<T> dx(L, d);
    const T inv = T(1) / static_cast<T>(std::max<int64_t>(seq.length, 1));
    for (int64_t t = 0; t < seq.length; ++t) {
        T* dxr = dx.row(t);
        for (int64_t i = 0; i < d; ++i) dxr[i] = dpooled.data[i] * inv;
    }

    if (c.num_layers > 0) {
        Mat<T> dx_pre;
        layer_norm_bwd(dx, p.final_ln_gain, tr.final_ln, dx_pre, g.final_ln_gain, g.final_ln_bias);
        dx = dx_pre;
    }

    for (int64_t l = c.num_layers - 1; l >= 0; --l) {
        const auto& lt = tr.layers[l];
        const auto& lp = p.layers[l];
        auto& lg = g.layers[l];
        // ffn block: x = x_mid + w2(gelu(w1(ln2(x_mid))))
        Mat<T> df2 = dx;
        Mat<T> dg_act;
        linear_bwd(lt.g, lp.w2, df2, dg_act, lg.w2, &lg.b2);
        for (size_t i = 0; i < dg_act.data.size(); ++i) dg_act.data[i] *= gelu_grad(lt.f1.data[i]);
        Mat<T> dln2_out;
        linear_bwd(lt.ln2_out, lp.w1, dg_act, dln2_out, lg.w1, &lg.b1);
        Mat<T> dx_mid;
        layer_norm_bwd(dln2_out, lp.ln2_gain, lt.ln2, dx_mid, lg.ln2_gain, lg.ln2_bias);
        for (size_t i = 0; i < dx.data.size(); ++i) dx_mid.data[i] += dx.data[i];  // residual

        // attention block: x_mid = x_in + wo(attn(ln1(x_in)))
        Mat<T> dattn_out = dx_mid;
        Mat<T> dln1_out;
        attention_bwd(lp, c, lt.ln1_out, seq.length, lt.attn, dattn_out, dln1_out, lg);
        Mat<T> dx_in;
        layer_norm_bwd(dln1_out, lp.ln1_gain, lt.ln1, dx_in, lg.ln1_gain, lg.ln1_bias);
        for (size_t i = 0; i < dx_mid.data.size(); ++i) dx_in.data[i] += dx_mid.data[i];  // residual
        dx = dx_in;
    }

    // embedding gather backward (position table is constant)
    for (int64_t t = 0; t < L; ++t) {
        T* er = g.embedding.row(seq.ids[t]);
        const T* dxr = dx.row(t);
        for (int64_t i = 0; i < d; ++i) er[i] += dxr[i];
    }
}

EmbeddingBatch encode_batch(const ParamSet& params, const EncoderConfig& config,
                            const std::vector<TokenSequence>& batch) {
    config.validate();
    if (batch.empty()) return Mat<float>(0, config.bottleneck_dim);
    const int64_t shared_len = batch[0].max_len;
    for (const auto& seq : batch) {
        if (seq.max_len != shared_len) throw Error("invalid_sequence: batch mixes max_len values");
        check_sequence<float>(config, seq);
    }
    Mat<float> out(static_cast<int64_t>(batch.size()), config.bottleneck_dim);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(batch.size()); ++i) {
        auto tr = encode_forward_one(params, config, batch[i]);
        float* row = out.row(i);
        for (int64_t j = 0; j < config.bottleneck_dim; ++j) row[j] = tr.out.data[j];
    }
    return out;
}

template <typename T>
ParamSetT<T> encode_backward(const ParamSetT<T>& params, const EncoderConfig& config,
                             const std::vector<TokenSequence>& batch, const Mat<T>& upstream) {
    config.validate();
    if (upstream.rows != static_cast<int64_t>(batch.size()) || upstream.cols != config.bottleneck_dim)
        throw Error("shape_mismatch: upstream gradient must be [batch x bottleneck]");
    ParamSetT<T> grads = params.like_zeros();
    for (size_t i = 0; i < batch.size(); ++i) {
        auto tr = encode_forward_one(params, config, batch[i]);
        encode_backward_one(params, config, tr, upstream.row(static_cast<int64_t>(i)), grads);
    }
    return grads;
}

// explicit instantiations
template EncodeTrace<float> encode_forward_one<float>(const ParamSetT<float>&, const EncoderConfig&,
                                                      const TokenSequence&);
template EncodeTrace<double> encode_forward_one<double>(const ParamSetT<double>&, const EncoderConfig&,
                                                        const TokenSequence&);
template void encode_backward_one<float>(const ParamSetT<float>&, const EncoderConfig&,
                                         const EncodeTrace<float>&, const float*, ParamSetT<float>&);
template void encode_backward_one<double>(const ParamSetT<double>&, const EncoderConfig&,
                                          const EncodeTrace<double>&, const double*, ParamSetT<double>&);
template ParamSetT<float> encode_backward<float>(const ParamSetT<float>&, const EncoderConfig&,
                                                 const std::vector<TokenSequence>&, const Mat<float>&);
template ParamSetT<double> encode_backward<double>(const ParamSetT<double>&, const EncoderConfig&,
                                                   const std::vector<TokenSequence>&, const Mat<double>&);

}  // namespace gtr
