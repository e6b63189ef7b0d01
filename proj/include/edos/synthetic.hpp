#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edos/dataset.hpp"

namespace edos {

// Stand-in for the non-redistributable source data: class balance follows
// the published distribution tables, and every class plants a marker token
// with probability pattern_strength so the tasks are learnable by design.
struct SyntheticSpec {
    std::size_t total_count = 0;
    double sexist_fraction = 3398.0 / 14000.0;
    std::vector<double> category_proportions; // within sexist; empty -> table defaults
    std::vector<double> vector_proportions;   // within sexist; empty -> table defaults
    double pattern_strength = 1.0;            // P(class marker appears in text)
    std::vector<std::string> vocab_seed_words; // filler pool; empty -> builtin
    std::uint64_t rng_seed = 0;
    std::size_t min_words = 6;
    std::size_t max_words = 18;
    // Distinct deterministic sentence patterns for the unlabeled corpus.
    std::size_t unlabeled_templates = 24;

    static SyntheticSpec with_defaults(std::size_t total, std::uint64_t seed,
                                       double pattern_strength = 1.0);
    void validate() const;
};

std::string class_marker_sexist(int sexist);   // task A marker token
std::string class_marker_category(int index);  // task B marker token
std::string class_marker_vector(int index);    // task C marker token

std::vector<LabeledExample> generate_synthetic(const SyntheticSpec& spec);

// Unlabeled in-domain corpus for masked-LM pretraining: lines are drawn from
// a small pool of fixed template sentences (uniform over classes, markers
// always present), a distribution deliberately shifted from the labeled set.
std::vector<std::string> generate_unlabeled(const SyntheticSpec& spec, std::size_t count);

// Largest-remainder allocation of total into buckets proportional to
// proportions; counts match expectations within one example.
std::vector<std::size_t> proportional_counts(std::size_t total, const std::vector<double>& proportions);

} // namespace edos
