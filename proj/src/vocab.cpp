#include "edos/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace edos {

namespace {

const char* kSpecialNames[Vocabulary::kNumSpecial] = {"[PAD]", "[CLS]", "[SEP]",
                                                      "[MASK]", "[UNK]", "<link>"};

} // namespace

Vocabulary::Vocabulary() = default;

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const std::string& tok = tokens_[i];
        if (tok.empty()) throw std::invalid_argument("Vocabulary: empty token");
        for (std::size_t s = 0; s < kNumSpecial; ++s)
            if (tok == kSpecialNames[s])
                throw std::invalid_argument("Vocabulary: token collides with special " + tok);
        if (!lookup_.emplace(tok, static_cast<std::int32_t>(i + kNumSpecial)).second)
            throw std::invalid_argument("Vocabulary: duplicate token " + tok);
    }
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, std::size_t min_freq,
                             std::size_t max_size) {
    if (corpus.empty()) throw std::invalid_argument("Vocabulary::build: empty corpus");
    if (min_freq < 1) throw std::invalid_argument("Vocabulary::build: min_freq must be >= 1");
    std::map<std::string, std::size_t> freq; // ordered map keeps ties lexicographic
    for (const auto& text : corpus)
        for (auto& tok : tokenize(text)) {
            if (tok == kSpecialNames[kLink]) continue; // already a special
            ++freq[tok];
        }
    std::vector<std::pair<std::string, std::size_t>> items;
    items.reserve(freq.size());
    for (auto& [tok, n] : freq)
        if (n >= min_freq) items.emplace_back(tok, n);
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t keep = items.size();
    if (max_size != 0) {
        if (max_size < kNumSpecial)
            throw std::invalid_argument("Vocabulary::build: max_size below special token count");
        keep = std::min(keep, max_size - kNumSpecial);
    }
    std::vector<std::string> tokens;
    tokens.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) tokens.push_back(items[i].first);
    return Vocabulary(std::move(tokens));
}

std::int32_t Vocabulary::id_of(std::string_view token) const {
    for (std::size_t s = 0; s < kNumSpecial; ++s)
        if (token == kSpecialNames[s]) return static_cast<std::int32_t>(s);
    auto it = lookup_.find(std::string(token));
    return it == lookup_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= size())
        throw std::out_of_range("Vocabulary::token_of: id " + std::to_string(id) +
                                " out of range for size " + std::to_string(size()));
    if (static_cast<std::size_t>(id) < kNumSpecial) {
        static const std::string names[kNumSpecial] = {"[PAD]", "[CLS]", "[SEP]",
                                                       "[MASK]", "[UNK]", "<link>"};
        return names[id];
    }
    return tokens_[id - kNumSpecial];
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
    for (const auto& tok : tokens_) out << tok << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
}

TokenBatch TokenBatch::select(const std::vector<std::size_t>& row_indices) const {
    TokenBatch out;
    out.rows = row_indices.size();
    out.max_len = max_len;
    out.ids.reserve(out.rows * max_len);
    out.attention_mask.reserve(out.rows * max_len);
    for (std::size_t r : row_indices) {
        if (r >= rows) throw std::out_of_range("TokenBatch::select: row out of range");
        out.ids.insert(out.ids.end(), ids.begin() + r * max_len, ids.begin() + (r + 1) * max_len);
        out.attention_mask.insert(out.attention_mask.end(), attention_mask.begin() + r * max_len,
                                  attention_mask.begin() + (r + 1) * max_len);
    }
    return out;
}

TokenBatch encode_batch(const std::vector<std::string>& texts, const Vocabulary& vocab,
                        std::size_t max_len) {
    if (max_len < 3) throw std::invalid_argument("encode: max_len must be >= 3");
    TokenBatch batch;
    batch.rows = texts.size();
    batch.max_len = max_len;
    batch.ids.assign(batch.rows * max_len, Vocabulary::kPad);
    batch.attention_mask.assign(batch.rows * max_len, 0);
    for (std::size_t r = 0; r < texts.size(); ++r) {
        const auto tokens = tokenize(texts[r]);
        const std::size_t content = std::min(tokens.size(), max_len - 2);
        std::int32_t* ids = batch.ids.data() + r * max_len;
        std::int32_t* mask = batch.attention_mask.data() + r * max_len;
        ids[0] = Vocabulary::kCls;
        for (std::size_t i = 0; i < content; ++i) ids[1 + i] = vocab.id_of(tokens[i]);
        ids[1 + content] = Vocabulary::kSep;
        for (std::size_t i = 0; i < content + 2; ++i) mask[i] = 1;
    }
    return batch;
}

TokenBatch encode(const std::string& text, const Vocabulary& vocab, std::size_t max_len) {
    return encode_batch({text}, vocab, max_len);
}

std::string decode(const std::vector<std::int32_t>& ids, const Vocabulary& vocab) {
    std::string out;
    for (std::int32_t id : ids) {
        const std::string& tok = vocab.token_of(id); // validates range
        if (id == Vocabulary::kPad || id == Vocabulary::kCls || id == Vocabulary::kSep) continue;
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

} // namespace edos
