#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "edos/encoder.hpp"
#include "edos/optimizer.hpp"
#include "edos/vocab.hpp"

namespace edos {

inline constexpr std::int32_t kMlmIgnore = -1;

// Token rows after corruption. targets carry the original id exactly at
// corrupted positions and kMlmIgnore elsewhere; [CLS]/[SEP]/[PAD] are never
// corrupted.
struct MlmBatch {
    std::vector<std::int32_t> input_ids;
    std::vector<std::int32_t> targets;
    std::vector<std::int32_t> attention_mask;
    std::size_t rows = 0;
    std::size_t max_len = 0;
};

// Each eligible position is selected independently with probability rate;
// selected positions become [MASK] 80% of the time, a uniform random
// non-special id 10%, and stay unchanged 10%.
MlmBatch mask_tokens(const TokenBatch& batch, double rate, Rng& rng, std::size_t vocab_size);

// Language-model head tied to the input embedding: logits = H Eᵀ + b.
template <typename T>
Var<T> mlm_logits(const Var<T>& hidden, const Var<T>& tok_emb, const Var<T>& out_bias) {
    return add(matmul(hidden, tok_emb, false, true), out_bias);
}

// Mean cross-entropy over target positions only.
template <typename T>
Var<T> mlm_loss(const Var<T>& logits, const std::vector<std::int32_t>& targets) {
    return cross_entropy_logits(logits, targets, kMlmIgnore);
}

double perplexity(double mean_nll);

// Encoder plus the tied output bias, owned by one store.
struct MlmModel {
    EncoderParams<float> encoder;
    Var<float> out_bias;
    std::shared_ptr<ParamStore<float>> store;
};

MlmModel make_mlm_model(const EncoderConfig& config, std::uint64_t seed);

struct DaptConfig {
    int epochs = 30;
    double learning_rate = 1e-5;
    AdamWConfig optimizer{1e-5, 0.9, 0.999, 1e-8, 0.01};
    std::size_t batch_size = 16;
    double mask_rate = 0.15;
    double eval_fraction = 0.05;
    std::uint64_t seed = 42;
    double stop_below_eval_perplexity = 0.0; // 0 = run all epochs
};

struct DaptEpoch {
    int epoch = 0;
    double train_loss = 0.0;
    double eval_loss = 0.0;
    double eval_perplexity = 0.0;
};

struct DaptResult {
    std::vector<DaptEpoch> log;
};

// Masked-LM adaptation over an unlabeled corpus. The eval split is held out
// deterministically under the config seed and masked with a fixed stream so
// eval losses are comparable across epochs. Model params are updated in
// place; epochs = 0 leaves them at initialization.
DaptResult dapt_run(const std::vector<std::string>& corpus, MlmModel& model,
                    const Vocabulary& vocab, const DaptConfig& config);

void save_dapt_log(const std::string& path, const DaptResult& result);

} // namespace edos
