#include "gtr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gtr/rng.hpp"

namespace gtr {

using nlohmann::json;

void QrelSet::set(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw Error("negative_grade: (" + query_id + ", " + doc_id + ")");
    auto& docs = by_query_[query_id];
    auto [it, inserted] = docs.emplace(doc_id, grade);
    if (!inserted)
        it->second = grade;
    else
        ++total_;
}

int QrelSet::grade(const std::string& query_id, const std::string& doc_id) const {
    auto qit = by_query_.find(query_id);
    if (qit == by_query_.end()) return 0;
    auto dit = qit->second.find(doc_id);
    return dit == qit->second.end() ? 0 : dit->second;
}

const std::map<std::string, int>& QrelSet::judgements_for(const std::string& query_id) const {
    static const std::map<std::string, int> kEmpty;
    auto it = by_query_.find(query_id);
    return it == by_query_.end() ? kEmpty : it->second;
}

std::vector<std::string> QrelSet::query_ids() const {
    std::vector<std::string> ids;
    ids.reserve(by_query_.size());
    for (const auto& [qid, _] : by_query_) ids.push_back(qid);
    return ids;
}

void Corpus::add(Document doc) {
    auto [it, inserted] = index_by_id_.emplace(doc.id, docs_.size());
    if (!inserted) throw Error("duplicate_id: document '" + doc.id + "'");
    docs_.push_back(std::move(doc));
}

const Document* Corpus::find(const std::string& id) const {
    auto it = index_by_id_.find(id);
    return it == index_by_id_.end() ? nullptr : &docs_[it->second];
}

std::optional<size_t> Corpus::ordinal_of(const std::string& id) const {
    auto it = index_by_id_.find(id);
    if (it == index_by_id_.end()) return std::nullopt;
    return it->second;
}

int64_t count_words(const std::string& title, const std::string& text) {
    std::string joined = title + " " + text;
    int64_t n = 0;
    bool in_word = false;
    for (unsigned char c : joined) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error: cannot open '" + path + "'");
    return in;
}

std::string json_string_field(const json& rec, const char* key, size_t line_no, const std::string& path) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string())
        throw Error("malformed_record: missing string field '" + std::string(key) + "' at " + path + ":" +
                    std::to_string(line_no));
    return it->get<std::string>();
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

Corpus load_corpus(const std::string& path, FileFormat format) {
    auto in = open_input(path);
    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Document doc;
        if (format == FileFormat::jsonl) {
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.is_object())
                throw Error("malformed_record: invalid json at " + path + ":" + std::to_string(line_no));
            doc.id = json_string_field(rec, "_id", line_no, path);
            doc.text = json_string_field(rec, "text", line_no, path);
            if (rec.contains("title")) doc.title = json_string_field(rec, "title", line_no, path);
        } else {
            auto fields = split_tabs(line);
            if (fields.size() < 2)
                throw Error("malformed_record: expected id<TAB>text at " + path + ":" + std::to_string(line_no));
            doc.id = fields[0];
            doc.text = fields[1];
            if (fields.size() >= 3) {
                // tsv convention: id, title, text
                doc.title = fields[1];
                doc.text = fields[2];
            }
        }
        if (doc.id.empty()) throw Error("malformed_record: empty id at " + path + ":" + std::to_string(line_no));
        doc.word_count = count_words(doc.title, doc.text);
        try {
            corpus.add(std::move(doc));
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " at " + path + ":" + std::to_string(line_no));
        }
    }
    return corpus;
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io_error: cannot write '" + path + "'");
    for (const auto& doc : corpus.documents()) {
        json rec;
        rec["_id"] = doc.id;
        rec["title"] = doc.title;
        rec["text"] = doc.text;
        out << rec.dump() << "\n";
    }
}

std::vector<Query> load_queries(const std::string& path, FileFormat format) {
    auto in = open_input(path);
    std::vector<Query> queries;
    std::unordered_map<std::string, size_t> seen;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Query q;
        if (format == FileFormat::jsonl) {
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.is_object())
                throw Error("malformed_record: invalid json at " + path + ":" + std::to_string(line_no));
            q.id = json_string_field(rec, "_id", line_no, path);
            q.text = json_string_field(rec, "text", line_no, path);
        } else {
            auto fields = split_tabs(line);
            if (fields.empty() || fields[0].empty())
                throw Error("malformed_record: expected id<TAB>text at " + path + ":" + std::to_string(line_no));
            q.id = fields[0];
            q.text = fields.size() >= 2 ? fields[1] : "";
        }
        if (q.id.empty()) throw Error("malformed_record: empty id at " + path + ":" + std::to_string(line_no));
        if (!seen.emplace(q.id, line_no).second)
            throw Error("duplicate_id: query '" + q.id + "' at " + path + ":" + std::to_string(line_no));
        queries.push_back(std::move(q));
    }
    return queries;
}

QrelSet load_qrels(const std::string& path) {
    auto in = open_input(path);
    QrelSet qrels;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string qid, iter, did, grade_str;
        if (!(ss >> qid)) continue;  // blank line
        if (!(ss >> iter >> did >> grade_str))
            throw Error("malformed_record: expected 'qid iter did grade' at " + path + ":" + std::to_string(line_no));
        int grade = 0;
        size_t consumed = 0;
        try {
            grade = std::stoi(grade_str, &consumed);
        } catch (const std::exception&) {
            throw Error("malformed_record: non-integer grade '" + grade_str + "' at " + path + ":" +
                        std::to_string(line_no));
        }
        if (consumed != grade_str.size())
            throw Error("malformed_record: non-integer grade '" + grade_str + "' at " + path + ":" +
                        std::to_string(line_no));
        if (grade < 0)
            throw Error("negative_grade: " + grade_str + " at " + path + ":" + std::to_string(line_no));
        qrels.set(qid, did, grade);
    }
    return qrels;
}

std::vector<TrainingExample> load_training_set(const std::string& pairs_path,
                                               const std::string& negatives_path,
                                               const Corpus& corpus,
                                               const std::vector<Query>& queries,
                                               size_t* skipped_negatives) {
    std::unordered_map<std::string, const Query*> query_by_id;
    for (const auto& q : queries) query_by_id[q.id] = &q;

    std::unordered_map<std::string, std::vector<std::string>> negatives;
    if (!negatives_path.empty()) {
        auto in = open_input(negatives_path);
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() != 2)
                throw Error("malformed_record: expected qid<TAB>did1,did2,... at " + negatives_path + ":" +
                            std::to_string(line_no));
            std::vector<std::string> ids;
            std::stringstream ss(fields[1]);
            std::string did;
            while (std::getline(ss, did, ',')) {
                if (!did.empty()) ids.push_back(did);
            }
            negatives[fields[0]] = std::move(ids);
        }
    }

    size_t skipped = 0;
    std::vector<TrainingExample> examples;
    auto in = open_input(pairs_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2)
            throw Error("malformed_record: expected query_id<TAB>doc_id at " + pairs_path + ":" +
                        std::to_string(line_no));
        const std::string& qid = fields[0];
        const std::string& did = fields[1];
        const Document* pos = corpus.find(did);
        if (pos == nullptr)
            throw Error("unknown_document: positive '" + did + "' at " + pairs_path + ":" + std::to_string(line_no));

        TrainingExample ex;
        auto qit = query_by_id.find(qid);
        if (qit == query_by_id.end())
            throw Error("unknown_query: '" + qid + "' at " + pairs_path + ":" + std::to_string(line_no));
        ex.query = *qit->second;
        ex.positive = *pos;
        auto nit = negatives.find(qid);
        if (nit != negatives.end()) {
            std::unordered_map<std::string, bool> taken;
            for (const auto& nid : nit->second) {
                if (nid == did) continue;  // positive never appears among negatives
                if (taken.count(nid)) continue;
                const Document* neg = corpus.find(nid);
                if (neg == nullptr) {
                    ++skipped;
                    continue;
                }
                taken[nid] = true;
                ex.hard_negatives.push_back(*neg);
            }
        }
        examples.push_back(std::move(ex));
    }
    if (skipped_negatives != nullptr) *skipped_negatives = skipped;
    return examples;
}

std::vector<TrainingExample> subsample_training_set(const std::vector<TrainingExample>& examples,
                                                    double fraction, uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw Error("invalid_fraction: must be in (0, 1], got " + std::to_string(fraction));
    const size_t n = examples.size();
    if (n == 0) return {};
    size_t keep = static_cast<size_t>(std::ceil(fraction * static_cast<double>(n)));
    if (keep > n) keep = n;

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    // shuffle over query-id-sorted positions so the draw depends only on ids
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return examples[a].query.id < examples[b].query.id; });
    Rng rng(seed);
    rng.shuffle(order);
    order.resize(keep);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return examples[a].query.id < examples[b].query.id; });

    std::vector<TrainingExample> kept;
    kept.reserve(keep);
    for (size_t idx : order) kept.push_back(examples[idx]);
    return kept;
}

}  // namespace gtr
