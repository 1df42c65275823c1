#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtr/encoder.hpp"
#include "gtr/matrix.hpp"

namespace gtr {

/// Row-major unit-norm vectors keyed by document id.
struct EmbeddingStore {
    Mat<float> vectors;               // [N x d]
    std::vector<std::string> doc_ids; // aligned to rows

    int64_t size() const { return vectors.rows; }
    int64_t dim() const { return vectors.cols; }
};

struct Hit {
    std::string doc_id;
    float score = 0;
};

/// Hits sorted by (score desc, doc_id asc); len(hits) == min(k, N).
struct RankedList {
    std::string query_id;
    std::vector<Hit> hits;
    int64_t k = 0;
};

struct IvfIndex {
    Mat<float> centroids;                        // [C x d]
    std::vector<std::vector<uint32_t>> postings; // row indices, partition of [0, N)
    bool trained = false;
};

constexpr int64_t kDefaultScanBlockRows = 4096;

/// Rows are defensively re-normalized; NaN rows and duplicate ids reject.
EmbeddingStore build_store(const Mat<float>& embeddings, std::vector<std::string> doc_ids);

/// Exact top-k by dot product: cache-blocked scan with a bounded heap,
/// sharded across threads and merged under the (score desc, id asc) order.
/// Results are identical for any thread count and block size.
RankedList search_exact(const EmbeddingStore& store, const float* query_vec, int64_t k,
                        int64_t block_rows = kDefaultScanBlockRows);

/// Serial reference: materialize every score and fully sort. Kept as the
/// oracle the blocked kernel is benchmarked and tested against.
RankedList search_exact_ref(const EmbeddingStore& store, const float* query_vec, int64_t k);

/// One query per task.
std::vector<RankedList> search_exact_batch(const EmbeddingStore& store, const Mat<float>& queries,
                                           int64_t k, int64_t block_rows = kDefaultScanBlockRows);

/// Seeded k-means++ then Lloyd iterations; deterministic per seed.
IvfIndex build_ivf(const EmbeddingStore& store, int64_t clusters, uint64_t seed, int64_t kmeans_iters);

/// Scans only the n_probe nearest clusters' postings.
RankedList search_ivf(const IvfIndex& index, const EmbeddingStore& store, const float* query_vec,
                      int64_t k, int64_t n_probe);

void save_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_store(const std::string& path);

void save_ivf(const IvfIndex& index, const std::string& path);
IvfIndex load_ivf(const std::string& path);

}  // namespace gtr
