#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtr/corpus.hpp"

namespace gtr {

constexpr int32_t kPadId = 0;
constexpr int32_t kOovBaseId = 1;

constexpr int64_t kDefaultQueryMaxLen = 64;
constexpr int64_t kDefaultDocMaxLen = 512;

/// Word vocabulary with hashed OOV buckets. Id layout:
///   0                       PAD
///   1 .. oov_buckets        OOV buckets (1 + fnv1a64(word) % oov_buckets)
///   1+oov_buckets ..        in-vocab words, dense, frequency-ranked
class Vocab {
public:
    Vocab() = default;
    Vocab(std::vector<std::string> words, int64_t oov_buckets);

    int64_t size() const { return 1 + oov_buckets_ + static_cast<int64_t>(words_.size()); }
    int64_t oov_buckets() const { return oov_buckets_; }
    int64_t word_count() const { return static_cast<int64_t>(words_.size()); }
    int64_t first_word_id() const { return 1 + oov_buckets_; }

    /// Token id for a (normalized) word: vocabulary id or hashed OOV bucket.
    int32_t id_of(const std::string& word) const;
    bool contains(const std::string& word) const { return token_to_id_.count(word) > 0; }
    const std::vector<std::string>& words() const { return words_; }

    bool operator==(const Vocab& o) const {
        return oov_buckets_ == o.oov_buckets_ && words_ == o.words_;
    }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int32_t> token_to_id_;
    int64_t oov_buckets_ = 1;
};

struct TokenSequence {
    std::vector<int32_t> ids;  // exactly max_len entries, right-padded with PAD
    int64_t length = 0;        // non-pad prefix length
    int64_t max_len = 0;
};

/// FNV-1a 64-bit; the fixed OOV hash.
uint64_t fnv1a64(const std::string& s);

/// Lowercased, punctuation-stripped whitespace words. Shared by the
/// vocabulary builder and the BM25 tokenization.
std::vector<std::string> tokenize_words(const std::string& text);

/// Top max_vocab words of the corpus by (frequency desc, word asc).
Vocab build_vocab(const Corpus& corpus, int64_t max_vocab, int64_t oov_buckets);

TokenSequence encode_text(const Vocab& vocab, const std::string& text, int64_t max_len);

void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace gtr
