#include "gtr/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "gtr/io.hpp"
#include "gtr/rng.hpp"

namespace gtr {

namespace {

/// Total order used everywhere a ranking is produced: higher score first,
/// ties by ascending doc id. Makes results independent of scan order.
struct HitBetter {
    const std::vector<std::string>& ids;
    bool operator()(const std::pair<float, uint32_t>& a, const std::pair<float, uint32_t>& b) const {
        if (a.first != b.first) return a.first > b.first;
        return ids[a.second] < ids[b.second];
    }
};

/// Bounded top-k accumulator over (score, row) candidates.
class TopK {
public:
    TopK(int64_t k, const std::vector<std::string>& ids) : k_(k), better_{ids} {}

    void push(float score, uint32_t row) {
        if (static_cast<int64_t>(heap_.size()) < k_) {
            heap_.emplace_back(score, row);
            std::push_heap(heap_.begin(), heap_.end(), better_);  // worst at front
            return;
        }
        if (better_({score, row}, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better_);
            heap_.back() = {score, row};
            std::push_heap(heap_.begin(), heap_.end(), better_);
        }
    }

    std::vector<std::pair<float, uint32_t>> sorted() {
        std::vector<std::pair<float, uint32_t>> out = heap_;
        std::sort(out.begin(), out.end(), better_);
        return out;
    }

    const std::vector<std::pair<float, uint32_t>>& raw() const { return heap_; }

private:
    int64_t k_;
    HitBetter better_;
    std::vector<std::pair<float, uint32_t>> heap_;
};

RankedList finalize(const EmbeddingStore& store, std::vector<std::pair<float, uint32_t>> top,
                    int64_t k) {
    std::sort(top.begin(), top.end(), HitBetter{store.doc_ids});
    RankedList out;
    out.k = k;
    out.hits.reserve(top.size());
    for (const auto& [score, row] : top) out.hits.push_back({store.doc_ids[row], score});
    return out;
}

}  // namespace

EmbeddingStore build_store(const Mat<float>& embeddings, std::vector<std::string> doc_ids) {
    if (static_cast<int64_t>(doc_ids.size()) != embeddings.rows)
        throw Error("shape_mismatch: " + std::to_string(doc_ids.size()) + " ids for " +
                    std::to_string(embeddings.rows) + " rows");
    std::unordered_set<std::string> seen;
    for (const auto& id : doc_ids)
        if (!seen.insert(id).second) throw Error("duplicate_id: document '" + id + "'");

    EmbeddingStore store;
    store.vectors = embeddings;
    store.doc_ids = std::move(doc_ids);
    for (int64_t r = 0; r < store.vectors.rows; ++r) {
        float* row = store.vectors.row(r);
        for (int64_t j = 0; j < store.vectors.cols; ++j)
            if (!std::isfinite(row[j]))
                throw Error("non_finite_embedding: row for document '" + store.doc_ids[r] + "'");
        double norm = std::sqrt(squared_l2(row, store.vectors.cols));
        if (norm == 0.0) throw Error("zero_vector: row for document '" + store.doc_ids[r] + "'");
        float inv = static_cast<float>(1.0 / norm);
        for (int64_t j = 0; j < store.vectors.cols; ++j) row[j] *= inv;
    }
    return store;
}

RankedList search_exact(const EmbeddingStore& store, const float* query_vec, int64_t k,
                        int64_t block_rows) {
    if (k < 1) throw Error("invalid_k: k must be >= 1");
    if (block_rows < 1) block_rows = kDefaultScanBlockRows;
    const int64_t n = store.size(), d = store.dim();
    if (n == 0) return RankedList{.query_id = "", .hits = {}, .k = k};

    const int64_t nblocks = (n + block_rows - 1) / block_rows;
    std::vector<TopK> block_tops;
    block_tops.reserve(nblocks);
    for (int64_t b = 0; b < nblocks; ++b) block_tops.emplace_back(k, store.doc_ids);

#pragma omp parallel for schedule(static)
    for (int64_t b = 0; b < nblocks; ++b) {
        const int64_t lo = b * block_rows, hi = std::min(n, lo + block_rows);
        TopK& top = block_tops[b];
        for (int64_t r = lo; r < hi; ++r) {
            float score = static_cast<float>(dot(store.vectors.row(r), query_vec, d));
            top.push(score, static_cast<uint32_t>(r));
        }
    }

    // merge per-block winners; the total order makes this scan-order free
    TopK merged(k, store.doc_ids);
    for (auto& top : block_tops)
        for (const auto& [score, row] : top.raw()) merged.push(score, row);
    return finalize(store, merged.raw(), k);
}

RankedList search_exact_ref(const EmbeddingStore& store, const float* query_vec, int64_t k) {
    if (k < 1) throw Error("invalid_k: k must be >= 1");
    const int64_t n = store.size(), d = store.dim();
    std::vector<std::pair<float, uint32_t>> scored(n);
    for (int64_t r = 0; r < n; ++r)
        scored[r] = {static_cast<float>(dot(store.vectors.row(r), query_vec, d)),
                     static_cast<uint32_t>(r)};
    std::sort(scored.begin(), scored.end(), HitBetter{store.doc_ids});
    if (static_cast<int64_t>(scored.size()) > k) scored.resize(k);
    return finalize(store, std::move(scored), k);
}

std::vector<RankedList> search_exact_batch(const EmbeddingStore& store, const Mat<float>& queries,
                                           int64_t k, int64_t block_rows) {
    std::vector<RankedList> out(queries.rows);
#pragma omp parallel for schedule(static)
    for (int64_t q = 0; q < queries.rows; ++q)
        out[q] = search_exact(store, queries.row(q), k, block_rows);
    return out;
}

namespace {

int64_t nearest_centroid(const Mat<float>& centroids, const float* x, int64_t d) {
    int64_t best = 0;
    double best_dist = squared_distance(centroids.row(0), x, d);
    for (int64_t c = 1; c < centroids.rows; ++c) {
        double dist = squared_distance(centroids.row(c), x, d);
        if (dist < best_dist) {  // strict: ties keep the lowest index
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

}  // namespace

IvfIndex build_ivf(const EmbeddingStore& store, int64_t clusters, uint64_t seed, int64_t kmeans_iters) {
    const int64_t n = store.size(), d = store.dim();
    if (clusters < 1 || clusters > n)
        throw Error("invalid_clusters: need 1 <= C <= N, got C=" + std::to_string(clusters) +
                    " N=" + std::to_string(n));

    Rng rng(seed);
    IvfIndex index;
    index.centroids = Mat<float>(clusters, d);

    // k-means++ seeding
    std::vector<double> dist2(n);
    std::vector<char> chosen(n, 0);
    int64_t first = static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(n)));
    std::memcpy(index.centroids.row(0), store.vectors.row(first), sizeof(float) * d);
    chosen[first] = 1;
    for (int64_t i = 0; i < n; ++i) dist2[i] = squared_distance(store.vectors.row(i), index.centroids.row(0), d);
    for (int64_t c = 1; c < clusters; ++c) {
        double total = 0;
        for (int64_t i = 0; i < n; ++i) total += dist2[i];
        int64_t pick = -1;
        if (total > 0) {
            double target = rng.uniform() * total;
            double acc = 0;
            for (int64_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            for (int64_t i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            if (pick < 0) pick = 0;  // all rows identical
        }
        chosen[pick] = 1;
        std::memcpy(index.centroids.row(c), store.vectors.row(pick), sizeof(float) * d);
        for (int64_t i = 0; i < n; ++i)
            dist2[i] = std::min(dist2[i], squared_distance(store.vectors.row(i), index.centroids.row(c), d));
    }

    // Lloyd iterations
    std::vector<int64_t> assign(n, 0);
    for (int64_t iter = 0; iter < kmeans_iters; ++iter) {
        bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (int64_t i = 0; i < n; ++i) {
            int64_t c = nearest_centroid(index.centroids, store.vectors.row(i), d);
            if (c != assign[i]) changed = true;
            assign[i] = c;
        }
        if (iter > 0 && !changed) break;
        // means accumulated in row order keeps the update thread-count free
        Mat<double> sums(clusters, d);
        std::vector<int64_t> counts(clusters, 0);
        for (int64_t i = 0; i < n; ++i) {
            const float* row = store.vectors.row(i);
            double* s = sums.row(assign[i]);
            for (int64_t j = 0; j < d; ++j) s[j] += row[j];
            ++counts[assign[i]];
        }
        for (int64_t c = 0; c < clusters; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            float* cr = index.centroids.row(c);
            const double* s = sums.row(c);
            for (int64_t j = 0; j < d; ++j) cr[j] = static_cast<float>(s[j] / counts[c]);
        }
    }
    // final assignment against the final centroids
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) assign[i] = nearest_centroid(index.centroids, store.vectors.row(i), d);

    index.postings.assign(clusters, {});
    for (int64_t i = 0; i < n; ++i) index.postings[assign[i]].push_back(static_cast<uint32_t>(i));
    index.trained = true;
    return index;
}

RankedList search_ivf(const IvfIndex& index, const EmbeddingStore& store, const float* query_vec,
                      int64_t k, int64_t n_probe) {
    if (!index.trained) throw Error("invalid_index: ivf index not trained");
    if (k < 1) throw Error("invalid_k: k must be >= 1");
    const int64_t C = index.centroids.rows, d = store.dim();
    if (n_probe < 1 || n_probe > C)
        throw Error("invalid_nprobe: need 1 <= n_probe <= C, got " + std::to_string(n_probe));
    if (store.size() == 0) return RankedList{.query_id = "", .hits = {}, .k = k};

    std::vector<std::pair<double, int64_t>> order(C);
    for (int64_t c = 0; c < C; ++c)
        order[c] = {squared_distance(index.centroids.row(c), query_vec, d), c};
    std::sort(order.begin(), order.end());  // distance asc, index asc on ties

    TopK top(k, store.doc_ids);
    for (int64_t p = 0; p < n_probe; ++p) {
        for (uint32_t row : index.postings[order[p].second]) {
            float score = static_cast<float>(dot(store.vectors.row(row), query_vec, d));
            top.push(score, row);
        }
    }
    return finalize(store, top.raw(), k);
}

// ---- persistence ----

namespace {
constexpr char kStoreMagic[4] = {'G', 'T', 'R', 'E'};
constexpr char kIvfMagic[4] = {'G', 'T', 'R', 'I'};
constexpr uint32_t kStoreVersion = 1;
constexpr uint32_t kIvfVersion = 1;
}

void save_store(const EmbeddingStore& store, const std::string& path) {
    BinaryWriter w(path);
    w.write_raw(kStoreMagic, 4);
    w.write_u32(kStoreVersion);
    w.write_u64(static_cast<uint64_t>(store.size()));
    w.write_u32(static_cast<uint32_t>(store.dim()));
    for (const auto& id : store.doc_ids) w.write_string(id);
    w.write_raw(store.vectors.data.data(), sizeof(float) * store.vectors.data.size());
}

EmbeddingStore load_store(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic(kStoreMagic, 4, "embedding store");
    uint32_t version = r.read_u32();
    if (version != kStoreVersion)
        throw Error("unsupported_version: store version " + std::to_string(version) + " (expected " +
                    std::to_string(kStoreVersion) + ")");
    uint64_t n = r.read_u64();
    uint32_t d = r.read_u32();
    EmbeddingStore store;
    store.doc_ids.reserve(n);
    for (uint64_t i = 0; i < n; ++i) store.doc_ids.push_back(r.read_string());
    store.vectors = Mat<float>(static_cast<int64_t>(n), static_cast<int64_t>(d));
    r.read_raw(store.vectors.data.data(), sizeof(float) * store.vectors.data.size());
    r.expect_eof();
    return store;
}

void save_ivf(const IvfIndex& index, const std::string& path) {
    BinaryWriter w(path);
    w.write_raw(kIvfMagic, 4);
    w.write_u32(kIvfVersion);
    w.write_u32(static_cast<uint32_t>(index.centroids.rows));
    w.write_u32(static_cast<uint32_t>(index.centroids.cols));
    w.write_raw(index.centroids.data.data(), sizeof(float) * index.centroids.data.size());
    for (const auto& list : index.postings) {
        w.write_u64(list.size());
        w.write_raw(list.data(), sizeof(uint32_t) * list.size());
    }
}

IvfIndex load_ivf(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic(kIvfMagic, 4, "ivf index");
    uint32_t version = r.read_u32();
    if (version != kIvfVersion)
        throw Error("unsupported_version: ivf version " + std::to_string(version));
    uint32_t c = r.read_u32();
    uint32_t d = r.read_u32();
    IvfIndex index;
    index.centroids = Mat<float>(c, d);
    r.read_raw(index.centroids.data.data(), sizeof(float) * index.centroids.data.size());
    index.postings.resize(c);
    for (auto& list : index.postings) {
        uint64_t len = r.read_u64();
        list.resize(len);
        r.read_raw(list.data(), sizeof(uint32_t) * len);
    }
    r.expect_eof();
    index.trained = true;
    return index;
}

}  // namespace gtr
