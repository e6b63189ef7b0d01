#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edos/labels.hpp"

namespace edos {

// One text with its hierarchical labels. Construct through make() so the
// hierarchy invariant always holds: a non-sexist example carries no
// category/vector, a sexist one carries both.
struct LabeledExample {
    std::string id;
    std::string text;
    int label_sexist = kNotSexist;      // kNotSexist / kSexist
    std::optional<int> label_category;  // Task B index
    std::optional<int> label_vector;    // Task C index

    static LabeledExample make(std::string id, std::string text, int label_sexist,
                               std::optional<int> label_category, std::optional<int> label_vector);
};

struct DatasetSplit {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> dev;
    std::vector<LabeledExample> test;
};

inline constexpr std::array<double, 3> kDefaultSplitRatios = {0.70, 0.10, 0.20};

enum class DatasetFormat { csv };

struct LoadOptions {
    DatasetFormat format = DatasetFormat::csv;
    bool rewire_id = false; // accept the official "rewire_id" column name for id
};

std::vector<LabeledExample> load_dataset(const std::string& path, LoadOptions options = {});
void save_dataset(const std::string& path, const std::vector<LabeledExample>& examples);

// id,text rows for prediction inputs; label columns, when present, are
// ignored here.
struct TextRow {
    std::string id;
    std::string text;
};
std::vector<TextRow> load_texts(const std::string& path, LoadOptions options = {});

// One line per document.
std::vector<std::string> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<std::string>& lines);

// Deterministic uniform shuffle under seed, then partition with the
// floor/remainder rule (remainders go to train).
DatasetSplit split_dataset(const std::vector<LabeledExample>& examples,
                           std::array<double, 3> ratios, std::uint64_t seed);

} // namespace edos
