#include "gtr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gtr/rng.hpp"

namespace gtr {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw Error("invalid_config: batch_size must be >= 1");
    if (!(temperature > 0)) throw Error("invalid_config: temperature must be > 0");
    if (steps < 0) throw Error("invalid_config: steps must be >= 0");
    if (!(init_lr > 0)) throw Error("invalid_config: init_lr must be > 0");
    if (query_max_len < 1 || doc_max_len < 1) throw Error("invalid_config: max_len must be >= 1");
    if (report_every < 1) throw Error("invalid_config: report_every must be >= 1");
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error("shape_mismatch: cosine_similarity");
    double na = std::sqrt(squared_l2(a.data(), static_cast<int64_t>(a.size())));
    double nb = std::sqrt(squared_l2(b.data(), static_cast<int64_t>(b.size())));
    if (na == 0.0 || nb == 0.0) throw Error("zero_vector: cosine_similarity undefined");
    return dot(a.data(), b.data(), static_cast<int64_t>(a.size())) / (na * nb);
}

namespace {

/// One softmax direction: rows of `from` against candidate rows `to`
/// (plus shared `extra` candidates); the diagonal entry is the target.
/// Accumulates loss and embedding gradients scaled by `weight`.
template <typename T>
double softmax_direction(const Mat<T>& from, const Mat<T>& to, const Mat<T>* extra, double tau,
                         double weight, Mat<T>& dfrom, Mat<T>& dto, Mat<T>* dextra) {
    const int64_t B = from.rows, d = from.cols;
    const int64_t M = extra != nullptr ? extra->rows : 0;
    const int64_t C = B + M;
    std::vector<double> scores(C), probs(C);
    double total = 0;
    for (int64_t i = 0; i < B; ++i) {
        const T* qi = from.row(i);
        double maxv = -1e300;
        for (int64_t j = 0; j < C; ++j) {
            const T* cj = j < B ? to.row(j) : extra->row(j - B);
            scores[j] = dot(qi, cj, d) / tau;
            maxv = std::max(maxv, scores[j]);
        }
        double denom = 0;
        for (int64_t j = 0; j < C; ++j) {
            probs[j] = std::exp(scores[j] - maxv);
            denom += probs[j];
        }
        total += std::log(denom) + maxv - scores[i];
        const double gscale = weight / (tau * static_cast<double>(B));
        for (int64_t j = 0; j < C; ++j) {
            double p = probs[j] / denom;
            double coeff = (p - (j == i ? 1.0 : 0.0)) * gscale;
            if (coeff == 0.0) continue;
            const T* cj = j < B ? to.row(j) : extra->row(j - B);
            T* dqi = dfrom.row(i);
            T* dcj = j < B ? dto.row(j) : dextra->row(j - B);
            for (int64_t x = 0; x < d; ++x) {
                dqi[x] += static_cast<T>(coeff * static_cast<double>(cj[x]));
                dcj[x] += static_cast<T>(coeff * static_cast<double>(qi[x]));
            }
        }
    }
    return weight * total / static_cast<double>(B);
}

}  // namespace

template <typename T>
LossGrads<T> contrastive_loss(const Mat<T>& queries, const Mat<T>& positives,
                              const Mat<T>& negatives, double tau, bool bidirectional) {
    if (queries.rows == 0) throw Error("invalid_batch: empty batch");
    if (!(tau > 0)) throw Error("invalid_config: temperature must be > 0");
    if (queries.rows != positives.rows || queries.cols != positives.cols)
        throw Error("shape_mismatch: queries vs positives");
    if (!negatives.empty() && negatives.cols != queries.cols)
        throw Error("shape_mismatch: negatives dimension");

    LossGrads<T> out;
    out.dq = Mat<T>(queries.rows, queries.cols);
    out.dpos = Mat<T>(positives.rows, positives.cols);
    if (!negatives.empty()) out.dneg = Mat<T>(negatives.rows, negatives.cols);

    const Mat<T>* extra = negatives.empty() ? nullptr : &negatives;
    const double w = bidirectional ? 0.5 : 1.0;
    double loss = softmax_direction(queries, positives, extra, tau, w, out.dq, out.dpos,
                                    negatives.empty() ? nullptr : &out.dneg);
    if (bidirectional) {
        // document-to-question direction; hard negatives are passages, not
        // queries, so they do not participate here
        loss += softmax_direction(positives, queries, static_cast<const Mat<T>*>(nullptr), tau, 0.5,
                                  out.dpos, out.dq, static_cast<Mat<T>*>(nullptr));
    }
    out.loss = loss;
    return out;
}

template <typename T>
LossGrads<T> in_batch_loss(const Mat<T>& queries, const Mat<T>& positives, double tau) {
    return contrastive_loss(queries, positives, Mat<T>(), tau, false);
}

template <typename T>
LossGrads<T> in_batch_loss_with_negatives(const Mat<T>& queries, const Mat<T>& positives,
                                          const Mat<T>& negatives, double tau) {
    return contrastive_loss(queries, positives, negatives, tau, false);
}

template <typename T>
LossGrads<T> bidirectional_loss(const Mat<T>& queries, const Mat<T>& positives, double tau) {
    return contrastive_loss(queries, positives, Mat<T>(), tau, true);
}

AdamState AdamState::like(const ParamSet& params) {
    AdamState s;
    s.m = params.like_zeros();
    s.v = params.like_zeros();
    s.t = 0;
    return s;
}

double lr_at(const TrainConfig& config, int64_t step_index) {
    if (config.steps <= 0) return 0.0;
    double frac = 1.0 - static_cast<double>(step_index) / static_cast<double>(config.steps);
    return config.init_lr * std::max(0.0, frac);
}

double grad_global_norm(const ParamSet& grads) {
    double acc = 0;
    visit_params(grads, [&](const std::string&, const Mat<float>& m) {
        acc += squared_l2(m.data.data(), m.size());
    });
    return std::sqrt(acc);
}

void optimizer_step(ParamSet& params, const ParamSet& grads, AdamState& state,
                    int64_t step_index, const TrainConfig& config) {
    visit_params(grads, [&](const std::string& name, const Mat<float>& g) {
        for (float v : g.data)
            if (!std::isfinite(v)) throw Error("non_finite_gradient: array '" + name + "'");
    });
    const double lr = lr_at(config, step_index);
    state.t += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));

    std::vector<Mat<float>*> pv, gv, mv, vv;
    visit_params(params, [&](const std::string&, Mat<float>& m) { pv.push_back(&m); });
    visit_params(const_cast<ParamSet&>(grads), [&](const std::string&, Mat<float>& m) { gv.push_back(&m); });
    visit_params(state.m, [&](const std::string&, Mat<float>& m) { mv.push_back(&m); });
    visit_params(state.v, [&](const std::string&, Mat<float>& m) { vv.push_back(&m); });
    if (pv.size() != gv.size() || pv.size() != mv.size() || pv.size() != vv.size())
        throw Error("shape_mismatch: optimizer state layout");

    for (size_t a = 0; a < pv.size(); ++a) {
        auto& p = *pv[a];
        const auto& g = *gv[a];
        auto& m = *mv[a];
        auto& v = *vv[a];
        for (size_t i = 0; i < p.data.size(); ++i) {
            double gi = g.data[i];
            double mi = kAdamBeta1 * m.data[i] + (1.0 - kAdamBeta1) * gi;
            double vi = kAdamBeta2 * v.data[i] + (1.0 - kAdamBeta2) * gi * gi;
            m.data[i] = static_cast<float>(mi);
            v.data[i] = static_cast<float>(vi);
            double update = lr * (mi / bc1) / (std::sqrt(vi / bc2) + kAdamEps);
            p.data[i] = static_cast<float>(p.data[i] - update);
            if (!std::isfinite(p.data[i])) throw Error("non_finite_param: after update");
        }
    }
}

namespace {

TokenSequence encode_doc_tokens(const Vocab& vocab, const Document& doc, int64_t max_len) {
    return encode_text(vocab, doc.full_text(), max_len);
}

}  // namespace

StageResult train_stage(const StageSpec& spec, const Vocab& vocab, const EncoderConfig& config,
                        ParamSet params) {
    const TrainConfig& cfg = spec.train_config;
    cfg.validate();
    config.validate();
    const auto& examples = spec.training_set;
    if (examples.empty()) throw Error("invalid_config: training set is empty");
    const int64_t n = static_cast<int64_t>(examples.size());
    if (cfg.batch_size > n)
        throw Error("batch_too_large: batch_size " + std::to_string(cfg.batch_size) + " exceeds dataset size " +
                    std::to_string(n) + "; lower batch_size");

    StageResult result;
    if (cfg.steps == 0) {
        result.params = std::move(params);
        return result;
    }

    // tokenize once up front; sequences are immutable afterwards
    std::vector<TokenSequence> query_seqs(n), pos_seqs(n);
    std::vector<std::vector<TokenSequence>> neg_seqs(n);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        query_seqs[i] = encode_text(vocab, examples[i].query.text, cfg.query_max_len);
        pos_seqs[i] = encode_doc_tokens(vocab, examples[i].positive, cfg.doc_max_len);
        if (cfg.use_hard_negatives)
            for (const auto& negdoc : examples[i].hard_negatives)
                neg_seqs[i].push_back(encode_doc_tokens(vocab, negdoc, cfg.doc_max_len));
    }

    AdamState adam = AdamState::like(params);
    Rng shuffle_rng(cfg.seed);
    std::vector<int64_t> order(n);
    for (int64_t i = 0; i < n; ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    int64_t cursor = 0;

    const int64_t bdim = config.bottleneck_dim;
    for (int64_t step = 0; step < cfg.steps; ++step) {
        if (cursor + cfg.batch_size > n) {
            shuffle_rng.shuffle(order);
            cursor = 0;
        }
        std::vector<int64_t> batch(order.begin() + cursor, order.begin() + cursor + cfg.batch_size);
        cursor += cfg.batch_size;

        const int64_t B = cfg.batch_size;
        std::vector<std::pair<int64_t, int64_t>> neg_index;  // (example, negative slot)
        for (int64_t i = 0; i < B; ++i)
            for (size_t s = 0; s < neg_seqs[batch[i]].size(); ++s)
                neg_index.emplace_back(i, static_cast<int64_t>(s));
        const int64_t M = static_cast<int64_t>(neg_index.size());

        std::vector<EncodeTrace<float>> q_tr(B), p_tr(B), n_tr(M);
#pragma omp parallel for schedule(static)
        for (int64_t i = 0; i < B + B + M; ++i) {
            if (i < B)
                q_tr[i] = encode_forward_one(params, config, query_seqs[batch[i]]);
            else if (i < 2 * B)
                p_tr[i - B] = encode_forward_one(params, config, pos_seqs[batch[i - B]]);
            else {
                auto [ex, slot] = neg_index[i - 2 * B];
                n_tr[i - 2 * B] = encode_forward_one(params, config, neg_seqs[batch[ex]][slot]);
            }
        }

        Mat<float> Q(B, bdim), P(B, bdim), N(M, bdim);
        for (int64_t i = 0; i < B; ++i) {
            std::copy(q_tr[i].out.data.begin(), q_tr[i].out.data.end(), Q.row(i));
            std::copy(p_tr[i].out.data.begin(), p_tr[i].out.data.end(), P.row(i));
        }
        for (int64_t i = 0; i < M; ++i)
            std::copy(n_tr[i].out.data.begin(), n_tr[i].out.data.end(), N.row(i));

        auto lg = contrastive_loss(Q, P, N, cfg.temperature, cfg.bidirectional);

        // backward; per-thread buffers merged in thread order
        ParamSet grads = params.like_zeros();
#ifdef _OPENMP
        int nthreads = omp_get_max_threads();
#else
        int nthreads = 1;
#endif
        if (nthreads > 1) {
            std::vector<ParamSet> partial(nthreads);
#pragma omp parallel
            {
                int tid = omp_get_thread_num();
                partial[tid] = params.like_zeros();
#pragma omp for schedule(static)
                for (int64_t i = 0; i < B + B + M; ++i) {
                    if (i < B)
                        encode_backward_one(params, config, q_tr[i], lg.dq.row(i), partial[tid]);
                    else if (i < 2 * B)
                        encode_backward_one(params, config, p_tr[i - B], lg.dpos.row(i - B), partial[tid]);
                    else
                        encode_backward_one(params, config, n_tr[i - 2 * B], lg.dneg.row(i - 2 * B), partial[tid]);
                }
            }
            for (auto& part : partial)
                visit_param_pairs(grads, part, [](Mat<float>& acc, Mat<float>& src) {
                    for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += src.data[i];
                });
        } else {
            for (int64_t i = 0; i < B; ++i) encode_backward_one(params, config, q_tr[i], lg.dq.row(i), grads);
            for (int64_t i = 0; i < B; ++i) encode_backward_one(params, config, p_tr[i], lg.dpos.row(i), grads);
            for (int64_t i = 0; i < M; ++i) encode_backward_one(params, config, n_tr[i], lg.dneg.row(i), grads);
        }

        double gnorm = grad_global_norm(grads);
        double lr = lr_at(cfg, step);
        optimizer_step(params, grads, adam, step, cfg);

        if (step % cfg.report_every == 0 || step == cfg.steps - 1)
            result.reports.push_back({step, lg.loss, lr, gnorm});
    }

    result.params = std::move(params);
    return result;
}

MultiStageResult run_multi_stage(const StageSpec& pretrain, const StageSpec& finetune,
                                 const Vocab& vocab, const EncoderConfig& config, ParamSet init) {
    MultiStageResult out;
    auto stage1 = train_stage(pretrain, vocab, config, std::move(init));
    out.pretrain_params = stage1.params;
    out.pretrain_reports = std::move(stage1.reports);
    auto stage2 = train_stage(finetune, vocab, config, std::move(stage1.params));
    out.final_params = std::move(stage2.params);
    out.finetune_reports = std::move(stage2.reports);
    return out;
}

void write_training_log(const std::string& path, const std::vector<LossReport>& reports) {
    std::ofstream out(path);
    if (!out) throw Error("io_error: cannot write '" + path + "'");
    char buf[160];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%lld\t%.9g\t%.9g\t%.9g\n", static_cast<long long>(r.step),
                      r.loss, r.lr, r.grad_norm);
        out << buf;
    }
}

// explicit instantiations
template LossGrads<float> contrastive_loss<float>(const Mat<float>&, const Mat<float>&,
                                                  const Mat<float>&, double, bool);
template LossGrads<double> contrastive_loss<double>(const Mat<double>&, const Mat<double>&,
                                                    const Mat<double>&, double, bool);
template LossGrads<float> in_batch_loss<float>(const Mat<float>&, const Mat<float>&, double);
template LossGrads<double> in_batch_loss<double>(const Mat<double>&, const Mat<double>&, double);
template LossGrads<float> in_batch_loss_with_negatives<float>(const Mat<float>&, const Mat<float>&,
                                                              const Mat<float>&, double);
template LossGrads<double> in_batch_loss_with_negatives<double>(const Mat<double>&, const Mat<double>&,
                                                                const Mat<double>&, double);
template LossGrads<float> bidirectional_loss<float>(const Mat<float>&, const Mat<float>&, double);
template LossGrads<double> bidirectional_loss<double>(const Mat<double>&, const Mat<double>&, double);

}  // namespace gtr
