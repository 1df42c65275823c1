#include "gtr/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace gtr {

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= static_cast<uint64_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) {
                words.push_back(cur);
                cur.clear();
            }
            continue;
        }
        if (c < 0x80 && std::ispunct(c)) continue;  // punctuation dropped; bytes >= 0x80 kept
        cur.push_back(static_cast<char>(std::tolower(c)));
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

Vocab::Vocab(std::vector<std::string> words, int64_t oov_buckets)
    : words_(std::move(words)), oov_buckets_(oov_buckets) {
    if (oov_buckets_ < 1) throw Error("invalid_vocab: oov_buckets must be >= 1");
    int32_t next = static_cast<int32_t>(first_word_id());
    for (const auto& w : words_) {
        if (!token_to_id_.emplace(w, next).second) throw Error("invalid_vocab: duplicate word '" + w + "'");
        ++next;
    }
}

int32_t Vocab::id_of(const std::string& word) const {
    auto it = token_to_id_.find(word);
    if (it != token_to_id_.end()) return it->second;
    return static_cast<int32_t>(kOovBaseId + fnv1a64(word) % static_cast<uint64_t>(oov_buckets_));
}

Vocab build_vocab(const Corpus& corpus, int64_t max_vocab, int64_t oov_buckets) {
    if (max_vocab < 1) throw Error("invalid_vocab: max_vocab must be >= 1");
    std::unordered_map<std::string, int64_t> freq;
    for (const auto& doc : corpus.documents())
        for (const auto& w : tokenize_words(doc.full_text())) ++freq[w];

    std::vector<std::pair<std::string, int64_t>> ranked(freq.begin(), freq.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int64_t>(ranked.size()) > max_vocab) ranked.resize(max_vocab);

    std::vector<std::string> words;
    words.reserve(ranked.size());
    for (auto& [w, _] : ranked) words.push_back(std::move(w));
    return Vocab(std::move(words), oov_buckets);
}

TokenSequence encode_text(const Vocab& vocab, const std::string& text, int64_t max_len) {
    if (max_len < 1) throw Error("invalid_max_len: must be >= 1");
    TokenSequence seq;
    seq.max_len = max_len;
    seq.ids.assign(max_len, kPadId);
    auto words = tokenize_words(text);
    int64_t n = std::min<int64_t>(max_len, static_cast<int64_t>(words.size()));
    for (int64_t i = 0; i < n; ++i) seq.ids[i] = vocab.id_of(words[i]);
    seq.length = n;
    return seq;
}

void save_vocab(const Vocab& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error: cannot write '" + path + "'");
    out << vocab.word_count() << "\t" << vocab.oov_buckets() << "\n";
    int64_t id = vocab.first_word_id();
    for (const auto& w : vocab.words()) out << w << "\t" << id++ << "\n";
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw Error("malformed_record: empty vocab file '" + path + "'");
    std::istringstream hs(header);
    int64_t n = 0, buckets = 0;
    if (!(hs >> n >> buckets)) throw Error("malformed_record: bad vocab header in '" + path + "'");
    std::vector<std::string> words;
    words.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) throw Error("malformed_record: bad vocab line in '" + path + "'");
        words.push_back(line.substr(0, tab));
    }
    if (static_cast<int64_t>(words.size()) != n)
        throw Error("malformed_record: vocab header count " + std::to_string(n) + " != " +
                    std::to_string(words.size()) + " entries in '" + path + "'");
    return Vocab(std::move(words), buckets);
}

}  // namespace gtr
