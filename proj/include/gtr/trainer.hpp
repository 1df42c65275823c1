#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtr/corpus.hpp"
#include "gtr/encoder.hpp"
#include "gtr/matrix.hpp"
#include "gtr/tokenizer.hpp"

namespace gtr {

struct TrainConfig {
    int64_t batch_size = 64;
    double temperature = 0.01;
    int64_t steps = 0;
    double init_lr = 1e-3;      // linear decay to 0 over steps
    bool bidirectional = false;
    bool use_hard_negatives = false;
    uint64_t seed = 0;
    int64_t query_max_len = kDefaultQueryMaxLen;
    int64_t doc_max_len = kDefaultDocMaxLen;
    int64_t report_every = 10;

    void validate() const;
};

enum class StageName { pretrain, finetune };

struct StageSpec {
    StageName name = StageName::pretrain;
    std::vector<TrainingExample> training_set;
    TrainConfig train_config;
    std::string init_from;  // empty = fresh params / caller-provided
};

struct LossReport {
    int64_t step = 0;
    double loss = 0;
    double lr = 0;
    double grad_norm = 0;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Loss value plus gradients with respect to the input embeddings.
template <typename T>
struct LossGrads {
    double loss = 0;
    Mat<T> dq;    // [B x d]
    Mat<T> dpos;  // [B x d]
    Mat<T> dneg;  // [M x d]; empty when no negatives were given
};

/// -mean_i log softmax_j(sim(q_i, cand_j)/tau)[i] where the candidates are
/// the batch positives followed by all hard negatives (negatives are shared
/// across the batch). With bidirectional set, averages with the
/// positives-to-queries direction, which never sees the negatives.
template <typename T>
LossGrads<T> contrastive_loss(const Mat<T>& queries, const Mat<T>& positives,
                              const Mat<T>& negatives, double tau, bool bidirectional);

template <typename T>
LossGrads<T> in_batch_loss(const Mat<T>& queries, const Mat<T>& positives, double tau);

template <typename T>
LossGrads<T> in_batch_loss_with_negatives(const Mat<T>& queries, const Mat<T>& positives,
                                          const Mat<T>& negatives, double tau);

template <typename T>
LossGrads<T> bidirectional_loss(const Mat<T>& queries, const Mat<T>& positives, double tau);

struct AdamState {
    ParamSet m, v;
    int64_t t = 0;

    static AdamState like(const ParamSet& params);
};

double lr_at(const TrainConfig& config, int64_t step_index);

/// Adam with the linear-decay schedule. Throws naming the offending array
/// if any gradient is non-finite.
void optimizer_step(ParamSet& params, const ParamSet& grads, AdamState& state,
                    int64_t step_index, const TrainConfig& config);

double grad_global_norm(const ParamSet& grads);

struct StageResult {
    ParamSet params;
    std::vector<LossReport> reports;
};

StageResult train_stage(const StageSpec& spec, const Vocab& vocab, const EncoderConfig& config,
                        ParamSet params);

struct MultiStageResult {
    ParamSet pretrain_params;
    ParamSet final_params;
    std::vector<LossReport> pretrain_reports;
    std::vector<LossReport> finetune_reports;
};

MultiStageResult run_multi_stage(const StageSpec& pretrain, const StageSpec& finetune,
                                 const Vocab& vocab, const EncoderConfig& config, ParamSet init);

/// One line per report: "step<TAB>loss<TAB>lr<TAB>grad_norm".
void write_training_log(const std::string& path, const std::vector<LossReport>& reports);

}  // namespace gtr
