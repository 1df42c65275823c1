#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtr/matrix.hpp"
#include "gtr/tokenizer.hpp"

namespace gtr {

enum class Arch { transformer, bag_mlp };

Arch arch_from_string(const std::string& s);
std::string arch_to_string(Arch a);

struct EncoderConfig {
    int64_t vocab_size = 0;   // total id space: 1 + oov_buckets + words
    int64_t model_dim = 64;
    int64_t ffn_dim = 128;
    int64_t num_layers = 2;
    int64_t num_heads = 4;
    int64_t bottleneck_dim = 64;
    int64_t max_len = 512;
    Arch arch = Arch::transformer;

    void validate() const;
    bool operator==(const EncoderConfig&) const = default;
};

template <typename T>
struct LayerParamsT {
    Mat<T> ln1_gain, ln1_bias;      // [1 x d]
    Mat<T> wq, wk, wv, wo;          // [d x d]
    Mat<T> ln2_gain, ln2_bias;      // [1 x d]
    Mat<T> w1, b1;                  // [d x f], [1 x f]
    Mat<T> w2, b2;                  // [f x d], [1 x d]
};

/// All learnable weights. Arrays unused by the configured arch stay empty
/// and are skipped by visit_params.
template <typename T>
struct ParamSetT {
    Mat<T> embedding;                     // [V x d]
    std::vector<LayerParamsT<T>> layers;  // transformer only
    Mat<T> final_ln_gain, final_ln_bias;  // transformer, num_layers > 0
    Mat<T> mlp_w1, mlp_b1, mlp_w2, mlp_b2;  // bag_mlp only
    Mat<T> projection;                    // [d x bottleneck]

    ParamSetT like_zeros() const;
    template <typename U> ParamSetT<U> cast() const;
    int64_t scalar_count() const;
};

using ParamSet = ParamSetT<float>;
using EmbeddingBatch = Mat<float>;

/// Visits every allocated array in a fixed order; f(name, mat).
template <typename T, typename F>
void visit_params(ParamSetT<T>& p, F&& f) {
    auto emit = [&](const std::string& name, Mat<T>& m) {
        if (!m.empty()) f(name, m);
    };
    emit("embedding", p.embedding);
    for (size_t l = 0; l < p.layers.size(); ++l) {
        auto& lp = p.layers[l];
        std::string pre = "layer" + std::to_string(l) + ".";
        emit(pre + "ln1_gain", lp.ln1_gain);
        emit(pre + "ln1_bias", lp.ln1_bias);
        emit(pre + "wq", lp.wq);
        emit(pre + "wk", lp.wk);
        emit(pre + "wv", lp.wv);
        emit(pre + "wo", lp.wo);
        emit(pre + "ln2_gain", lp.ln2_gain);
        emit(pre + "ln2_bias", lp.ln2_bias);
        emit(pre + "w1", lp.w1);
        emit(pre + "b1", lp.b1);
        emit(pre + "w2", lp.w2);
        emit(pre + "b2", lp.b2);
    }
    emit("final_ln_gain", p.final_ln_gain);
    emit("final_ln_bias", p.final_ln_bias);
    emit("mlp_w1", p.mlp_w1);
    emit("mlp_b1", p.mlp_b1);
    emit("mlp_w2", p.mlp_w2);
    emit("mlp_b2", p.mlp_b2);
    emit("projection", p.projection);
}

template <typename T, typename F>
void visit_params(const ParamSetT<T>& p, F&& f) {
    visit_params(const_cast<ParamSetT<T>&>(p), [&](const std::string& name, Mat<T>& m) {
        f(name, static_cast<const Mat<T>&>(m));
    });
}

/// Visits matching arrays of two sets in lockstep (shapes must agree).
template <typename T, typename F>
void visit_param_pairs(ParamSetT<T>& a, ParamSetT<T>& b, F&& f);

ParamSet init_params(const EncoderConfig& config, uint64_t seed);
int64_t count_params(const EncoderConfig& config);

/// Mean-pooled, bottleneck-projected, L2-normalized embeddings; one row
/// per sequence. Parallel over examples; rows are thread-count invariant.
EmbeddingBatch encode_batch(const ParamSet& params, const EncoderConfig& config,
                            const std::vector<TokenSequence>& batch);

template <typename T>
struct LayerNormTrace {
    Mat<T> xhat;
    std::vector<T> rstd;
};

template <typename T>
struct AttentionTrace {
    Mat<T> q, k, v;    // [L x d]
    Mat<T> weights;    // [heads*L x L], zero where key is padding
    Mat<T> ctx;        // [L x d], concatenated head contexts
};

template <typename T>
struct LayerTrace {
    Mat<T> x_in;
    LayerNormTrace<T> ln1;
    Mat<T> ln1_out;
    AttentionTrace<T> attn;
    Mat<T> x_mid;      // after attention residual
    LayerNormTrace<T> ln2;
    Mat<T> ln2_out;
    Mat<T> f1;         // pre-activation
    Mat<T> g;          // post-activation
};

/// Per-example forward state kept for the backward pass.
template <typename T>
struct EncodeTrace {
    TokenSequence seq;
    Mat<T> x0;                   // embeddings (+ positions) [L x d]
    std::vector<LayerTrace<T>> layers;
    LayerNormTrace<T> final_ln;
    Mat<T> x_final_in;
    Mat<T> x_out;                // pooled over rows of this
    Mat<T> mlp_f1, mlp_g;        // bag_mlp trace
    Mat<T> pooled;               // [1 x d]
    Mat<T> z;                    // [1 x bottleneck], pre-normalization
    T z_norm = T(0);
    Mat<T> out;                  // [1 x bottleneck], unit row
};

template <typename T>
EncodeTrace<T> encode_forward_one(const ParamSetT<T>& params, const EncoderConfig& config,
                                  const TokenSequence& seq);

/// Accumulates d(loss)/d(params) for one example into grads given
/// d(loss)/d(output embedding).
template <typename T>
void encode_backward_one(const ParamSetT<T>& params, const EncoderConfig& config,
                         const EncodeTrace<T>& trace, const T* upstream, ParamSetT<T>& grads);

/// Gradients of the full forward map for a batch; upstream is
/// [batch x bottleneck]. Recomputes forward traces internally.
template <typename T>
ParamSetT<T> encode_backward(const ParamSetT<T>& params, const EncoderConfig& config,
                             const std::vector<TokenSequence>& batch, const Mat<T>& upstream);

// ---- definitions ----

template <typename T>
ParamSetT<T> ParamSetT<T>::like_zeros() const {
    ParamSetT<T> out;
    out.layers.resize(layers.size());
    auto zero_like = [](const Mat<T>& m) { return Mat<T>(m.rows, m.cols); };
    out.embedding = zero_like(embedding);
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& src = layers[l];
        auto& dst = out.layers[l];
        dst.ln1_gain = zero_like(src.ln1_gain);
        dst.ln1_bias = zero_like(src.ln1_bias);
        dst.wq = zero_like(src.wq);
        dst.wk = zero_like(src.wk);
        dst.wv = zero_like(src.wv);
        dst.wo = zero_like(src.wo);
        dst.ln2_gain = zero_like(src.ln2_gain);
        dst.ln2_bias = zero_like(src.ln2_bias);
        dst.w1 = zero_like(src.w1);
        dst.b1 = zero_like(src.b1);
        dst.w2 = zero_like(src.w2);
        dst.b2 = zero_like(src.b2);
    }
    out.final_ln_gain = zero_like(final_ln_gain);
    out.final_ln_bias = zero_like(final_ln_bias);
    out.mlp_w1 = zero_like(mlp_w1);
    out.mlp_b1 = zero_like(mlp_b1);
    out.mlp_w2 = zero_like(mlp_w2);
    out.mlp_b2 = zero_like(mlp_b2);
    out.projection = zero_like(projection);
    return out;
}

template <typename T>
template <typename U>
ParamSetT<U> ParamSetT<T>::cast() const {
    ParamSetT<U> out;
    out.embedding = embedding.template cast<U>();
    out.layers.resize(layers.size());
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& src = layers[l];
        auto& dst = out.layers[l];
        dst.ln1_gain = src.ln1_gain.template cast<U>();
        dst.ln1_bias = src.ln1_bias.template cast<U>();
        dst.wq = src.wq.template cast<U>();
        dst.wk = src.wk.template cast<U>();
        dst.wv = src.wv.template cast<U>();
        dst.wo = src.wo.template cast<U>();
        dst.ln2_gain = src.ln2_gain.template cast<U>();
        dst.ln2_bias = src.ln2_bias.template cast<U>();
        dst.w1 = src.w1.template cast<U>();
        dst.b1 = src.b1.template cast<U>();
        dst.w2 = src.w2.template cast<U>();
        dst.b2 = src.b2.template cast<U>();
    }
    out.final_ln_gain = final_ln_gain.template cast<U>();
    out.final_ln_bias = final_ln_bias.template cast<U>();
    out.mlp_w1 = mlp_w1.template cast<U>();
    out.mlp_b1 = mlp_b1.template cast<U>();
    out.mlp_w2 = mlp_w2.template cast<U>();
    out.mlp_b2 = mlp_b2.template cast<U>();
    out.projection = projection.template cast<U>();
    return out;
}

template <typename T>
int64_t ParamSetT<T>::scalar_count() const {
    int64_t n = 0;
    visit_params(*this, [&](const std::string&, const Mat<T>& m) { n += m.size(); });
    return n;
}

template <typename T, typename F>
void visit_param_pairs(ParamSetT<T>& a, ParamSetT<T>& b, F&& f) {
    std::vector<Mat<T>*> av, bv;
    visit_params(a, [&](const std::string&, Mat<T>& m) { av.push_back(&m); });
    visit_params(b, [&](const std::string&, Mat<T>& m) { bv.push_back(&m); });
    if (av.size() != bv.size()) throw Error("shape_mismatch: param sets differ in layout");
    for (size_t i = 0; i < av.size(); ++i) f(*av[i], *bv[i]);
}

}  // namespace gtr
