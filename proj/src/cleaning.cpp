#include "edos/cleaning.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <utility>
#include <vector>

namespace edos {

namespace {

// Common emoji only; anything outside the table passes through untouched.
const std::vector<std::pair<std::string, std::string>>& emoji_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"😀", ":grinning:"},      {"😃", ":smiley:"},        {"😄", ":smile:"},
        {"😁", ":grin:"},          {"😆", ":laughing:"},      {"😅", ":sweat_smile:"},
        {"😂", ":joy:"},           {"🤣", ":rofl:"},          {"😊", ":blush:"},
        {"😇", ":innocent:"},      {"🙂", ":slight_smile:"},  {"😉", ":wink:"},
        {"😌", ":relieved:"},      {"😍", ":heart_eyes:"},    {"😘", ":kissing_heart:"},
        {"😋", ":yum:"},           {"😎", ":sunglasses:"},    {"🤔", ":thinking:"},
        {"😐", ":neutral_face:"},  {"😑", ":expressionless:"},{"🙄", ":eye_roll:"},
        {"😏", ":smirk:"},         {"😣", ":persevere:"},     {"😮", ":open_mouth:"},
        {"😪", ":sleepy:"},        {"😫", ":tired_face:"},    {"😴", ":sleeping:"},
        {"😛", ":tongue:"},        {"😜", ":wink_tongue:"},   {"🤤", ":drooling:"},
        {"😒", ":unamused:"},      {"😔", ":pensive:"},       {"😕", ":confused:"},
        {"🙃", ":upside_down:"},   {"😲", ":astonished:"},    {"😖", ":confounded:"},
        {"😞", ":disappointed:"},  {"😟", ":worried:"},       {"😤", ":triumph:"},
        {"😢", ":cry:"},           {"😭", ":sob:"},           {"😨", ":fearful:"},
        {"😩", ":weary:"},         {"😬", ":grimacing:"},     {"😱", ":scream:"},
        {"😳", ":flushed:"},       {"😡", ":rage:"},          {"😠", ":angry:"},
        {"❤", ":heart:"},          {"💔", ":broken_heart:"},  {"👍", ":thumbs_up:"},
        {"👎", ":thumbs_down:"},   {"🙏", ":pray:"},          {"👏", ":clap:"},
        {"💪", ":muscle:"},        {"🔥", ":fire:"},          {"💯", ":hundred:"},
        {"🎉", ":tada:"},
    };
    return table;
}

std::vector<std::string> split_whitespace(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

bool is_link(const std::string& token) {
    return token.rfind("http://", 0) == 0 || token.rfind("https://", 0) == 0 ||
           token.rfind("www.", 0) == 0;
}

bool undoublable(char c) {
    // l/s/z/f commonly end stems doubled already (fall, kiss, buzz, stuff)
    return c != 'l' && c != 's' && c != 'z' && c != 'f';
}

std::string strip_and_undouble(const std::string& word, std::size_t suffix_len) {
    std::string stem = word.substr(0, word.size() - suffix_len);
    if (stem.size() >= 3 && stem[stem.size() - 1] == stem[stem.size() - 2] &&
        undoublable(stem.back()) && !std::isdigit(static_cast<unsigned char>(stem.back())))
        stem.pop_back();
    return stem;
}

} // namespace

std::string lemmatize_word(const std::string& word) {
    const std::size_t n = word.size();
    auto ends = [&](const char* suffix) {
        const std::size_t m = std::char_traits<char>::length(suffix);
        return n >= m && word.compare(n - m, m, suffix) == 0;
    };
    if (n >= 5 && ends("ies")) return word.substr(0, n - 3) + "y";
    if (ends("ss")) return word;
    if (n >= 4 && ends("es")) {
        const char before = word[n - 3];
        if (before == 's' || before == 'x' || before == 'z' || before == 'o' ||
            (n >= 5 && (word.compare(n - 4, 2, "ch") == 0 || word.compare(n - 4, 2, "sh") == 0)))
            return word.substr(0, n - 2);
    }
    if (n >= 3 && ends("s") && !ends("us") && !ends("is")) return word.substr(0, n - 1);
    if (n >= 5 && ends("ing")) {
        if (n - 3 >= 2) return strip_and_undouble(word, 3);
        return word;
    }
    if (n >= 4 && ends("ed")) {
        if (n - 2 >= 2) return strip_and_undouble(word, 2);
        return word;
    }
    return word;
}

const std::unordered_set<std::string>& builtin_stopwords() {
    static const std::unordered_set<std::string> words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
        "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
        "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
        "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
        "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
        "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
        "for", "with", "about", "against", "between", "into", "through", "during", "before",
        "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
        "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
        "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
        "just", "don", "should", "now",
    };
    return words;
}

std::string clean_text(const std::string& text, const CleaningOptions& options) {
    if (!options.any()) return text;

    std::string s = text;
    if (options.emoji_to_text) {
        std::string replaced;
        replaced.reserve(s.size());
        for (std::size_t i = 0; i < s.size();) {
            bool hit = false;
            for (const auto& [emoji, name] : emoji_table()) {
                if (s.compare(i, emoji.size(), emoji) == 0) {
                    replaced += ' ';
                    replaced += name;
                    replaced += ' ';
                    i += emoji.size();
                    hit = true;
                    break;
                }
            }
            if (!hit) replaced.push_back(s[i++]);
        }
        s = std::move(replaced);
    }
    if (options.lowercase)
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    const bool token_steps = options.emoji_to_text || options.link_to_tag ||
                             options.strip_punctuation || options.drop_words_with_digits ||
                             options.drop_stopwords || options.lemmatize;
    if (!token_steps) return s;

    std::vector<std::string> tokens = split_whitespace(s);
    if (options.link_to_tag)
        for (auto& tok : tokens)
            if (is_link(tok)) tok = "<link>";
    if (options.strip_punctuation) {
        std::vector<std::string> kept;
        for (auto& tok : tokens) {
            if (tok == "<link>") {
                kept.push_back(tok);
                continue;
            }
            std::string stripped;
            for (char c : tok)
                if (!std::ispunct(static_cast<unsigned char>(c))) stripped.push_back(c);
            if (!stripped.empty()) kept.push_back(std::move(stripped));
        }
        tokens = std::move(kept);
    }
    if (options.drop_words_with_digits) {
        std::vector<std::string> kept;
        for (auto& tok : tokens) {
            bool has_digit = false;
            for (char c : tok)
                if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
            if (!has_digit) kept.push_back(std::move(tok));
        }
        tokens = std::move(kept);
    }
    if (options.drop_stopwords) {
        std::vector<std::string> kept;
        for (auto& tok : tokens)
            if (!builtin_stopwords().count(tok)) kept.push_back(std::move(tok));
        tokens = std::move(kept);
    }
    if (options.lemmatize)
        for (auto& tok : tokens)
            if (tok != "<link>") tok = lemmatize_word(tok);
    return join(tokens);
}

} // namespace edos
