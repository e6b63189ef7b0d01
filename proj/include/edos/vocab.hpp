#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace edos {

// Word-level vocabulary with fixed special ids. Immutable after build.
class Vocabulary {
public:
    static constexpr std::int32_t kPad = 0;
    static constexpr std::int32_t kCls = 1;
    static constexpr std::int32_t kSep = 2;
    static constexpr std::int32_t kMask = 3;
    static constexpr std::int32_t kUnk = 4;
    static constexpr std::int32_t kLink = 5;
    static constexpr std::size_t kNumSpecial = 6;

    Vocabulary();
    explicit Vocabulary(std::vector<std::string> tokens); // non-special tokens in id order

    // Lowercased whitespace tokens with frequency >= min_freq, ordered by
    // frequency (desc) then token (asc), truncated so the total vocabulary
    // (specials included) does not exceed max_size. max_size 0 = unlimited.
    static Vocabulary build(const std::vector<std::string>& corpus, std::size_t min_freq = 1,
                            std::size_t max_size = 0);

    std::size_t size() const { return kNumSpecial + tokens_.size(); }
    std::int32_t id_of(std::string_view token) const; // kUnk when absent
    const std::string& token_of(std::int32_t id) const;
    const std::vector<std::string>& tokens() const { return tokens_; } // non-specials

    void save(const std::string& path) const; // one token per line, specials implicit
    static Vocabulary load(const std::string& path);

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;                       // id = index + kNumSpecial
    std::unordered_map<std::string, std::int32_t> lookup_;
};

// Fixed-length id rows with attention masks. mask[i][j] == 0 exactly at
// [PAD] positions; every row is [CLS] ... [SEP] [PAD]*.
struct TokenBatch {
    std::vector<std::int32_t> ids;  // rows * max_len, row-major
    std::vector<std::int32_t> attention_mask;
    std::size_t rows = 0;
    std::size_t max_len = 64;

    const std::int32_t* row_ids(std::size_t r) const { return ids.data() + r * max_len; }
    const std::int32_t* row_mask(std::size_t r) const { return attention_mask.data() + r * max_len; }
    TokenBatch select(const std::vector<std::size_t>& row_indices) const;
};

inline constexpr std::size_t kDefaultMaxLen = 64;

std::vector<std::string> tokenize(const std::string& text); // lowercase + whitespace split

TokenBatch encode(const std::string& text, const Vocabulary& vocab,
                  std::size_t max_len = kDefaultMaxLen);
TokenBatch encode_batch(const std::vector<std::string>& texts, const Vocabulary& vocab,
                        std::size_t max_len = kDefaultMaxLen);

std::string decode(const std::vector<std::int32_t>& ids, const Vocabulary& vocab);

} // namespace edos
