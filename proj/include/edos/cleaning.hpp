#pragma once

#include <string>
#include <unordered_set>

namespace edos {

// Preprocessing switches, applied in this fixed order regardless of which
// are enabled. All default off: cleaned text scored worse than raw text in
// the experiments, so the pipeline is opt-in.
struct CleaningOptions {
    bool emoji_to_text = false;
    bool lowercase = false;
    bool link_to_tag = false;
    bool strip_punctuation = false;
    bool drop_words_with_digits = false;
    bool drop_stopwords = false;
    bool lemmatize = false;

    static CleaningOptions all_on() {
        return {true, true, true, true, true, true, true};
    }
    bool any() const {
        return emoji_to_text || lowercase || link_to_tag || strip_punctuation ||
               drop_words_with_digits || drop_stopwords || lemmatize;
    }
};

std::string clean_text(const std::string& text, const CleaningOptions& options);

// Rule-based suffix stripper: plural -s/-es/-ies, -ing, -ed. No lexicon.
std::string lemmatize_word(const std::string& word);

const std::unordered_set<std::string>& builtin_stopwords();

} // namespace edos
