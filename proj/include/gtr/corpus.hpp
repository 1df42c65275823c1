#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gtr/matrix.hpp"

namespace gtr {

struct Document {
    std::string id;
    std::string title;
    std::string text;
    int64_t word_count = 0;  // whitespace tokens of "title + ' ' + text", trimmed

    /// Text fed to tokenizers and indexes: title and body joined by a space.
    std::string full_text() const {
        if (title.empty()) return text;
        if (text.empty()) return title;
        return title + " " + text;
    }
};

struct Query {
    std::string id;
    std::string text;
};

/// Graded relevance judgements. Lookup is total: absent pairs are grade 0.
class QrelSet {
public:
    void set(const std::string& query_id, const std::string& doc_id, int grade);
    int grade(const std::string& query_id, const std::string& doc_id) const;

    /// Judged (doc_id, grade) entries for one query; empty map if none.
    const std::map<std::string, int>& judgements_for(const std::string& query_id) const;

    std::vector<std::string> query_ids() const;  // sorted
    size_t size() const { return total_; }

private:
    std::map<std::string, std::map<std::string, int>> by_query_;
    size_t total_ = 0;
};

struct TrainingExample {
    Query query;
    Document positive;
    std::vector<Document> hard_negatives;
};

class Corpus {
public:
    void add(Document doc);  // throws on duplicate id
    const Document& at(size_t ordinal) const { return docs_[ordinal]; }
    const Document* find(const std::string& id) const;
    std::optional<size_t> ordinal_of(const std::string& id) const;
    size_t size() const { return docs_.size(); }
    const std::vector<Document>& documents() const { return docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, size_t> index_by_id_;
};

enum class FileFormat { jsonl, tsv };

int64_t count_words(const std::string& title, const std::string& text);

Corpus load_corpus(const std::string& path, FileFormat format);
void save_corpus_jsonl(const Corpus& corpus, const std::string& path);

std::vector<Query> load_queries(const std::string& path, FileFormat format);

/// TREC qrels: whitespace-separated "qid iter did grade" lines.
QrelSet load_qrels(const std::string& path);

/// Joins a pairs file (query_id<TAB>positive_doc_id) and an optional
/// negatives file (query_id<TAB>did1,did2,...) against a corpus.
/// Unknown positive doc ids are hard errors; unknown negatives are skipped
/// and counted in *skipped_negatives when provided.
std::vector<TrainingExample> load_training_set(const std::string& pairs_path,
                                               const std::string& negatives_path,
                                               const Corpus& corpus,
                                               const std::vector<Query>& queries,
                                               size_t* skipped_negatives = nullptr);

/// Keeps ceil(fraction * N) whole examples, chosen by a seeded uniform
/// shuffle of query ids; output is sorted by query id.
std::vector<TrainingExample> subsample_training_set(const std::vector<TrainingExample>& examples,
                                                    double fraction, uint64_t seed);

}  // namespace gtr
