#include "edos/infer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace edos {

int argmax_lowest(const std::vector<double>& probs) {
    if (probs.empty()) throw std::invalid_argument("argmax_lowest: empty vector");
    int best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = static_cast<int>(i);
    return best;
}

int joint_b_predict(const std::vector<double>& probs5) {
    if (probs5.size() != 5) throw std::invalid_argument("joint_b_predict: expected 5 classes");
    int best = 0;
    for (int i = 1; i < kJointNotSexistClass; ++i)
        if (probs5[i] > probs5[best]) best = i;
    return best;
}

std::string class_label(TaskSelect task, int index) {
    switch (task) {
        case TaskSelect::A: return TaskLabelSet::for_task(Task::A).label(index);
        case TaskSelect::B: return TaskLabelSet::for_task(Task::B).label(index);
        case TaskSelect::C: return TaskLabelSet::for_task(Task::C).label(index);
        case TaskSelect::B_joint:
            if (index == kJointNotSexistClass) return "not sexist";
            return TaskLabelSet::for_task(Task::B).label(index);
    }
    throw std::logic_error("class_label: bad task");
}

namespace {

std::vector<double> softmax_row(const float* logits, std::size_t k) {
    double mx = logits[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(logits[j]));
    std::vector<double> probs(k);
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        probs[j] = std::exp(static_cast<double>(logits[j]) - mx);
        denom += probs[j];
    }
    for (double& p : probs) p /= denom;
    return probs;
}

std::vector<std::vector<double>> batched_probs(const ModelBundle<float>& bundle,
                                               const TokenBatch& all, std::size_t batch_size) {
    std::vector<std::vector<double>> out;
    out.reserve(all.rows);
    for (std::size_t start = 0; start < all.rows; start += batch_size) {
        const std::size_t end = std::min(all.rows, start + batch_size);
        std::vector<std::size_t> rows(end - start);
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = start + i;
        const TokenBatch batch = all.select(rows);
        Var<float> logits = forward_logits(bundle, batch);
        const std::size_t k = logits.shape().back();
        for (std::size_t r = 0; r < batch.rows; ++r)
            out.push_back(softmax_row(logits.value().data() + r * k, k));
    }
    return out;
}

std::size_t effective_len(const ModelBundle<float>& bundle, const std::vector<std::string>& texts) {
    std::size_t longest = 0;
    for (const auto& t : texts) longest = std::max(longest, tokenize(t).size());
    std::size_t cap = bundle.encoder_a.config.max_len;
    if (bundle.encoder_b) cap = std::min(cap, bundle.encoder_b->config.max_len);
    return std::max<std::size_t>(3, std::min(cap, longest + 2));
}

} // namespace

std::vector<int> predict_classes(const ModelBundle<float>& bundle, const TokenBatch& all,
                                 std::size_t batch_size) {
    std::vector<int> out;
    out.reserve(all.rows);
    for (const auto& probs : batched_probs(bundle, all, batch_size))
        out.push_back(argmax_lowest(probs));
    return out;
}

std::vector<Prediction> predict(const ModelBundle<float>& bundle, const std::vector<TextRow>& rows,
                                const Vocabulary& vocab, std::size_t batch_size) {
    std::vector<std::string> texts;
    texts.reserve(rows.size());
    for (const auto& r : rows) texts.push_back(r.text);
    const TokenBatch all = encode_batch(texts, vocab, effective_len(bundle, texts));
    const auto probs = batched_probs(bundle, all, batch_size);
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Prediction p;
        p.id = rows[i].id;
        p.task = bundle.task;
        p.probs = probs[i];
        p.label_index = argmax_lowest(p.probs);
        p.label = class_label(bundle.task, p.label_index);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<HierarchicalPrediction> hierarchical_predict(
    const ModelBundle<float>& model_a, const Vocabulary& vocab_a, const ModelBundle<float>& model_b,
    const Vocabulary& vocab_b, const ModelBundle<float>& model_c, const Vocabulary& vocab_c,
    const std::vector<TextRow>& rows, std::size_t batch_size) {
    if (model_a.task != TaskSelect::A || model_c.task != TaskSelect::C ||
        (model_b.task != TaskSelect::B && model_b.task != TaskSelect::B_joint))
        throw std::invalid_argument("hierarchical_predict: bundle tasks do not match A/B/C roles");
    const auto preds_a = predict(model_a, rows, vocab_a, batch_size);

    std::vector<TextRow> sexist_rows;
    std::vector<std::size_t> sexist_at;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (preds_a[i].label_index == kSexist) {
            sexist_rows.push_back(rows[i]);
            sexist_at.push_back(i);
        }

    std::vector<HierarchicalPrediction> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = {rows[i].id, preds_a[i].label, "none", "none"};
    if (sexist_rows.empty()) return out;

    const auto preds_b = predict(model_b, sexist_rows, vocab_b, batch_size);
    const auto preds_c = predict(model_c, sexist_rows, vocab_c, batch_size);
    const auto& set_b = TaskLabelSet::for_task(Task::B);
    for (std::size_t s = 0; s < sexist_rows.size(); ++s) {
        const std::size_t i = sexist_at[s];
        if (model_b.task == TaskSelect::B_joint)
            out[i].label_category = set_b.label(joint_b_predict(preds_b[s].probs));
        else
            out[i].label_category = preds_b[s].label;
        out[i].label_vector = preds_c[s].label;
    }
    return out;
}

void save_predictions_csv(const std::string& path, const std::vector<Prediction>& predictions,
                          bool include_probs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write predictions file: " + path);
    out << "id,task,label";
    if (include_probs && !predictions.empty())
        for (std::size_t i = 0; i < predictions[0].probs.size(); ++i) out << ",p" << i;
    out << '\n';
    char buf[32];
    for (const auto& p : predictions) {
        std::string label = p.label;
        if (label.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : label) {
                if (c == '"') quoted += "\"\"";
                else quoted.push_back(c);
            }
            quoted.push_back('"');
            label = quoted;
        }
        out << p.id << ',' << task_select_name(p.task) << ',' << label;
        if (include_probs)
            for (double prob : p.probs) {
                std::snprintf(buf, sizeof(buf), ",%.6f", prob);
                out << buf;
            }
        out << '\n';
    }
}

} // namespace edos
