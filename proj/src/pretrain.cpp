#include "edos/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace edos {

MlmBatch mask_tokens(const TokenBatch& batch, double rate, Rng& rng, std::size_t vocab_size) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("mask_tokens: rate must be in [0,1]");
    if (vocab_size < Vocabulary::kNumSpecial)
        throw std::invalid_argument("mask_tokens: vocab smaller than special token set");
    const std::size_t n_regular = vocab_size - Vocabulary::kNumSpecial;
    MlmBatch out;
    out.rows = batch.rows;
    out.max_len = batch.max_len;
    out.input_ids = batch.ids;
    out.attention_mask = batch.attention_mask;
    out.targets.assign(batch.ids.size(), kMlmIgnore);
    for (std::size_t i = 0; i < batch.ids.size(); ++i) {
        const std::int32_t id = batch.ids[i];
        if (id == Vocabulary::kPad || id == Vocabulary::kCls || id == Vocabulary::kSep) continue;
        if (rng.uniform() >= rate) continue;
        out.targets[i] = id;
        const double action = rng.uniform();
        if (action < 0.8 || n_regular == 0) {
            out.input_ids[i] = Vocabulary::kMask;
        } else if (action < 0.9) {
            out.input_ids[i] = static_cast<std::int32_t>(Vocabulary::kNumSpecial +
                                                         rng.uniform_int(n_regular));
        } // else: keep the original token
    }
    return out;
}

double perplexity(double mean_nll) {
    if (!std::isfinite(mean_nll)) throw std::invalid_argument("perplexity: mean NLL not finite");
    return std::exp(mean_nll);
}

MlmModel make_mlm_model(const EncoderConfig& config, std::uint64_t seed) {
    MlmModel model;
    model.store = std::make_shared<ParamStore<float>>();
    Rng rng(seed);
    model.encoder = init_encoder_params(config, *model.store, "enc.", rng.split("enc"));
    model.out_bias = model.store->add("mlm.out_bias", Tensor<float>({config.vocab_size}));
    return model;
}

namespace {

struct Batching {
    std::vector<std::vector<std::size_t>> batches;
};

Batching make_batches(const std::vector<std::size_t>& order, std::size_t batch_size) {
    Batching b;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        b.batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return b;
}

double mlm_eval_loss(MlmModel& model, const std::vector<MlmBatch>& eval_batches) {
    double total = 0.0;
    std::size_t positions = 0;
    for (const auto& mb : eval_batches) {
        TokenBatch tb;
        tb.ids = mb.input_ids;
        tb.attention_mask = mb.attention_mask;
        tb.rows = mb.rows;
        tb.max_len = mb.max_len;
        auto states = encode_all_layers(model.encoder, tb);
        Var<float> logits = mlm_logits(states.back(), model.encoder.tok_emb, model.out_bias);
        std::size_t count = 0;
        for (std::int32_t t : mb.targets)
            if (t != kMlmIgnore) ++count;
        if (count == 0) continue;
        Var<float> loss = mlm_loss(logits, mb.targets);
        total += static_cast<double>(loss.value()[0]) * static_cast<double>(count);
        positions += count;
    }
    return positions > 0 ? total / static_cast<double>(positions) : 0.0;
}

} // namespace

DaptResult dapt_run(const std::vector<std::string>& corpus, MlmModel& model,
                    const Vocabulary& vocab, const DaptConfig& config) {
    if (corpus.empty()) throw std::invalid_argument("dapt_run: empty corpus");
    if (config.epochs < 0) throw std::invalid_argument("dapt_run: negative epochs");
    if (vocab.size() != model.encoder.config.vocab_size)
        throw std::invalid_argument("dapt_run: vocabulary size does not match encoder");

    // Pad to the longest document rather than the full context window.
    std::size_t longest = 0;
    for (const auto& line : corpus) longest = std::max(longest, tokenize(line).size());
    const std::size_t seq_len = std::min(model.encoder.config.max_len, longest + 2);
    const TokenBatch all = encode_batch(corpus, vocab, seq_len);

    Rng rng = Rng(config.seed).split("dapt");
    std::vector<std::size_t> indices(corpus.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    {
        Rng shuffle = rng.split("eval-split");
        for (std::size_t i = indices.size(); i > 1; --i)
            std::swap(indices[i - 1], indices[shuffle.uniform_int(i)]);
    }
    std::size_t n_eval = static_cast<std::size_t>(
        std::llround(config.eval_fraction * static_cast<double>(corpus.size())));
    n_eval = std::min(std::max<std::size_t>(n_eval, 1), corpus.size() - 1);
    const std::vector<std::size_t> eval_rows(indices.begin(), indices.begin() + n_eval);
    const std::vector<std::size_t> train_rows(indices.begin() + n_eval, indices.end());

    // Fixed eval corruption: the same masked positions every epoch.
    std::vector<MlmBatch> eval_batches;
    {
        Rng eval_rng = rng.split("eval-mask");
        for (const auto& batch_rows : make_batches(eval_rows, config.batch_size).batches)
            eval_batches.push_back(
                mask_tokens(all.select(batch_rows), config.mask_rate, eval_rng, vocab.size()));
    }

    AdamWConfig opt_cfg = config.optimizer;
    opt_cfg.learning_rate = config.learning_rate;
    AdamW<float> optimizer(*model.store, opt_cfg);

    DaptResult result;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order = train_rows;
        {
            Rng shuffle = rng.split("order").split(static_cast<std::uint64_t>(epoch));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[shuffle.uniform_int(i)]);
        }
        const auto batching = make_batches(order, config.batch_size);
        double loss_sum = 0.0;
        std::size_t batch_count = 0;
        Rng mask_rng = rng.split("mask").split(static_cast<std::uint64_t>(epoch));
        for (std::size_t bi = 0; bi < batching.batches.size(); ++bi) {
            const MlmBatch mb =
                mask_tokens(all.select(batching.batches[bi]), config.mask_rate, mask_rng, vocab.size());
            TokenBatch tb;
            tb.ids = mb.input_ids;
            tb.attention_mask = mb.attention_mask;
            tb.rows = mb.rows;
            tb.max_len = mb.max_len;
            ForwardOptions<float> fwd{true,
                                      rng.split("dropout").split(static_cast<std::uint64_t>(epoch))
                                          .split(bi)};
            auto states = encode_all_layers(model.encoder, tb, fwd);
            Var<float> logits = mlm_logits(states.back(), model.encoder.tok_emb, model.out_bias);
            Var<float> loss = mlm_loss(logits, mb.targets);
            const double loss_value = static_cast<double>(loss.value()[0]);
            if (!std::isfinite(loss_value))
                throw std::runtime_error("dapt_run: non-finite loss at epoch " +
                                         std::to_string(epoch) + " batch " + std::to_string(bi));
            model.store->zero_grad();
            backward(loss);
            optimizer.step(*model.store);
            loss_sum += loss_value;
            ++batch_count;
        }
        DaptEpoch row;
        row.epoch = epoch;
        row.train_loss = batch_count ? loss_sum / static_cast<double>(batch_count) : 0.0;
        row.eval_loss = mlm_eval_loss(model, eval_batches);
        row.eval_perplexity = perplexity(row.eval_loss);
        result.log.push_back(row);
        if (config.stop_below_eval_perplexity > 0.0 &&
            row.eval_perplexity < config.stop_below_eval_perplexity)
            break;
    }
    model.store->zero_grad();
    return result;
}

void save_dapt_log(const std::string& path, const DaptResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write log file: " + path);
    out << "epoch,train_loss,eval_loss,perplexity\n";
    char buf[160];
    for (const auto& row : result.log) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f\n", row.epoch, row.train_loss,
                      row.eval_loss, row.eval_perplexity);
        out << buf;
    }
}

} // namespace edos
