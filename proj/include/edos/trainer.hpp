#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edos/dataset.hpp"
#include "edos/heads.hpp"
#include "edos/optimizer.hpp"
#include "edos/vocab.hpp"

namespace edos {

enum class InitKind { random, from_dapt_checkpoint };

struct TrainConfig {
    int epochs = 20;
    double learning_rate = 1e-5;
    AdamWConfig optimizer{1e-5, 0.9, 0.999, 1e-8, 0.01};
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
    TaskSelect task = TaskSelect::A;
    InitKind init = InitKind::random;
    bool freeze_encoders = false;
    bool class_weights = false; // inverse-frequency weights; off matches the training recipe

    void validate() const {
        if (epochs < 0) throw std::invalid_argument("TrainConfig: negative epochs");
        if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
    }
};

struct TrainEpoch {
    int epoch = 0;
    double train_loss = 0.0;
    double dev_macro_f1 = 0.0;
};

struct TrainLog {
    std::vector<TrainEpoch> epochs;
    int best_epoch = -1; // 1-based; -1 when no epochs ran
    double best_dev_macro_f1 = 0.0;
};

// Examples and label indices for one task. Task A keeps everything with
// binary labels; B and C keep gold-sexist rows only; B_joint keeps
// everything with "not sexist" appended as a fifth class.
struct TaskSelection {
    std::vector<LabeledExample> examples;
    std::vector<std::int32_t> labels;
    std::size_t num_classes = 0;
};

TaskSelection select_training_set(const std::vector<LabeledExample>& examples, TaskSelect task);

// Supervised loop: deterministic batch order per (seed, epoch), AdamW step
// per batch, dev macro F1 after each epoch. The bundle is left at the
// best-dev epoch's parameters (ties keep the earlier epoch).
TrainLog train(ModelBundle<float>& bundle, const DatasetSplit& split, const Vocabulary& vocab,
               const TrainConfig& config);

void save_train_log(const std::string& path, const TrainLog& log);

// Dev metric used during training: macro F1 on the task's evaluation
// protocol (gold-sexist subset with the joint rule for B_joint).
double dev_macro_f1(const ModelBundle<float>& bundle, const std::vector<LabeledExample>& dev,
                    const Vocabulary& vocab, std::size_t batch_size, std::size_t seq_len);

} // namespace edos
