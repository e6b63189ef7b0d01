#pragma once

#include <string>
#include <vector>

#include "edos/dataset.hpp"
#include "edos/heads.hpp"
#include "edos/vocab.hpp"

namespace edos {

struct Prediction {
    std::string id;
    TaskSelect task = TaskSelect::A;
    std::vector<double> probs; // softmax over model classes, sums to 1
    int label_index = 0;
    std::string label;
};

// Argmax with ties broken toward the lowest class index.
int argmax_lowest(const std::vector<double>& probs);

// Joint-learning task B rule over (4 categories + "not sexist"): take the
// top class, and when that is "not sexist" take the runner-up — which is
// always the argmax restricted to the four category coordinates.
int joint_b_predict(const std::vector<double>& probs5);

// Display label for a model class index (B_joint appends "not sexist").
std::string class_label(TaskSelect task, int index);

// Batched argmax classes for already-encoded rows (eval mode).
std::vector<int> predict_classes(const ModelBundle<float>& bundle, const TokenBatch& all,
                                 std::size_t batch_size = 32);

std::vector<Prediction> predict(const ModelBundle<float>& bundle,
                                const std::vector<TextRow>& rows, const Vocabulary& vocab,
                                std::size_t batch_size = 32);

struct HierarchicalPrediction {
    std::string id;
    std::string label_sexist;
    std::string label_category; // "none" for predicted non-sexist
    std::string label_vector;   // "none" for predicted non-sexist
};

// A predicted for everything; B and C only where A says sexist. The B model
// may be a plain 4-class or a joint 5-class bundle.
std::vector<HierarchicalPrediction> hierarchical_predict(
    const ModelBundle<float>& model_a, const Vocabulary& vocab_a, const ModelBundle<float>& model_b,
    const Vocabulary& vocab_b, const ModelBundle<float>& model_c, const Vocabulary& vocab_c,
    const std::vector<TextRow>& rows, std::size_t batch_size = 32);

void save_predictions_csv(const std::string& path, const std::vector<Prediction>& predictions,
                          bool include_probs);

} // namespace edos
