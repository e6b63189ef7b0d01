#include "edos/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "edos/infer.hpp"
#include "edos/metrics.hpp"
#include "edos/ops.hpp"

namespace edos {

TaskSelection select_training_set(const std::vector<LabeledExample>& examples, TaskSelect task) {
    TaskSelection sel;
    sel.num_classes = num_classes_for(task);
    for (const auto& ex : examples) {
        switch (task) {
            case TaskSelect::A:
                sel.examples.push_back(ex);
                sel.labels.push_back(ex.label_sexist);
                break;
            case TaskSelect::B:
                if (ex.label_sexist == kSexist) {
                    sel.examples.push_back(ex);
                    sel.labels.push_back(*ex.label_category);
                }
                break;
            case TaskSelect::C:
                if (ex.label_sexist == kSexist) {
                    sel.examples.push_back(ex);
                    sel.labels.push_back(*ex.label_vector);
                }
                break;
            case TaskSelect::B_joint:
                sel.examples.push_back(ex);
                sel.labels.push_back(ex.label_sexist == kSexist ? *ex.label_category
                                                                : kJointNotSexistClass);
                break;
        }
    }
    if ((task == TaskSelect::B || task == TaskSelect::C) && sel.examples.empty())
        throw std::invalid_argument("select_training_set: no sexist examples for task " +
                                    std::string(task_select_name(task)));
    return sel;
}

namespace {

std::size_t effective_seq_len(const ModelBundle<float>& bundle,
                              const std::vector<LabeledExample>& train,
                              const std::vector<LabeledExample>& dev) {
    std::size_t longest = 0;
    for (const auto& ex : train) longest = std::max(longest, tokenize(ex.text).size());
    for (const auto& ex : dev) longest = std::max(longest, tokenize(ex.text).size());
    std::size_t cap = bundle.encoder_a.config.max_len;
    if (bundle.encoder_b) cap = std::min(cap, bundle.encoder_b->config.max_len);
    return std::max<std::size_t>(3, std::min(cap, longest + 2));
}

TokenBatch encode_examples(const std::vector<LabeledExample>& examples, const Vocabulary& vocab,
                           std::size_t seq_len) {
    std::vector<std::string> texts;
    texts.reserve(examples.size());
    for (const auto& ex : examples) texts.push_back(ex.text);
    return encode_batch(texts, vocab, seq_len);
}

std::vector<float> inverse_frequency_weights(const std::vector<std::int32_t>& labels,
                                             std::size_t num_classes) {
    std::vector<std::int64_t> counts(num_classes, 0);
    for (std::int32_t l : labels) counts[l]++;
    std::vector<float> weights(num_classes, 0.0f);
    for (std::size_t c = 0; c < num_classes; ++c)
        weights[c] = counts[c] > 0 ? static_cast<float>(labels.size()) /
                                         (static_cast<float>(num_classes) *
                                          static_cast<float>(counts[c]))
                                   : 0.0f;
    return weights;
}

} // namespace

double dev_macro_f1(const ModelBundle<float>& bundle, const std::vector<LabeledExample>& dev,
                    const Vocabulary& vocab, std::size_t batch_size, std::size_t seq_len) {
    if (bundle.task == TaskSelect::B_joint) {
        // Scored on the gold-sexist subset with the joint second-best rule.
        const TaskSelection sel = select_training_set(dev, TaskSelect::B);
        std::vector<TextRow> rows;
        rows.reserve(sel.examples.size());
        for (const auto& ex : sel.examples) rows.push_back({ex.id, ex.text});
        const auto preds = predict(bundle, rows, vocab, batch_size);
        std::vector<int> pred_labels;
        pred_labels.reserve(preds.size());
        for (const auto& p : preds) pred_labels.push_back(joint_b_predict(p.probs));
        std::vector<int> golds(sel.labels.begin(), sel.labels.end());
        return macro_f1(confusion(golds, pred_labels, TaskLabelSet::for_task(Task::B)));
    }
    const TaskSelection sel = select_training_set(dev, bundle.task);
    const TokenBatch all = encode_examples(sel.examples, vocab, seq_len);
    const std::vector<int> preds = predict_classes(bundle, all, batch_size);
    std::vector<int> golds(sel.labels.begin(), sel.labels.end());
    return macro_f1(confusion(golds, preds, sel.num_classes));
}

TrainLog train(ModelBundle<float>& bundle, const DatasetSplit& split, const Vocabulary& vocab,
               const TrainConfig& config) {
    config.validate();
    if (config.task != bundle.task)
        throw std::invalid_argument("train: config task does not match bundle task");
    if (split.dev.empty()) throw std::invalid_argument("train: dev set is empty");

    const TaskSelection train_sel = select_training_set(split.train, config.task);
    if (train_sel.examples.empty()) throw std::invalid_argument("train: empty training selection");
    const std::size_t seq_len = effective_seq_len(bundle, train_sel.examples, split.dev);
    const TokenBatch all_train = encode_examples(train_sel.examples, vocab, seq_len);

    std::vector<float> weights;
    if (config.class_weights)
        weights = inverse_frequency_weights(train_sel.labels, train_sel.num_classes);

    if (config.freeze_encoders) {
        for (auto& [name, var] : *bundle.store)
            if (name.rfind("enc_a.", 0) == 0 || name.rfind("enc_b.", 0) == 0)
                var.node()->requires_grad = false;
    }

    AdamWConfig opt_cfg = config.optimizer;
    opt_cfg.learning_rate = config.learning_rate;
    AdamW<float> optimizer(*bundle.store, opt_cfg);
    Rng rng = Rng(config.seed).split("train");

    TrainLog log;
    std::vector<Tensor<float>> best_values;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(train_sel.examples.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        {
            Rng shuffle = rng.split("order").split(static_cast<std::uint64_t>(epoch));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[shuffle.uniform_int(i)]);
        }

        double loss_sum = 0.0;
        std::size_t seen = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::vector<std::size_t> rows(order.begin() + start, order.begin() + end);
            const TokenBatch batch = all_train.select(rows);
            std::vector<std::int32_t> labels(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train_sel.labels[rows[i]];

            ForwardOptions<float> fwd{true, rng.split("dropout")
                                                .split(static_cast<std::uint64_t>(epoch))
                                                .split(batch_index)};
            Var<float> logits = forward_logits(bundle, batch, fwd);
            Var<float> loss = cross_entropy_logits(logits, labels, -1, weights);
            const double loss_value = static_cast<double>(loss.value()[0]);
            if (!std::isfinite(loss_value))
                throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                         " batch " + std::to_string(batch_index));
            bundle.store->zero_grad();
            backward(loss);
            optimizer.step(*bundle.store);
            loss_sum += loss_value * static_cast<double>(rows.size());
            seen += rows.size();
            ++batch_index;
        }

        TrainEpoch row;
        row.epoch = epoch;
        row.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        row.dev_macro_f1 = dev_macro_f1(bundle, split.dev, vocab, config.batch_size, seq_len);
        log.epochs.push_back(row);
        if (log.best_epoch < 0 || row.dev_macro_f1 > log.best_dev_macro_f1) {
            log.best_epoch = epoch;
            log.best_dev_macro_f1 = row.dev_macro_f1;
            best_values = bundle.store->snapshot();
        }
    }
    bundle.store->zero_grad();
    if (!best_values.empty()) bundle.store->restore(best_values);
    return log;
}

void save_train_log(const std::string& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write log file: " + path);
    out << "epoch,train_loss,dev_macro_f1\n";
    char buf[128];
    for (const auto& row : log.epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", row.epoch, row.train_loss,
                      row.dev_macro_f1);
        out << buf;
    }
    if (log.best_epoch >= 0) out << "# best_epoch=" << log.best_epoch << '\n';
}

} // namespace edos
