#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chronoqa/embedder.hpp"
#include "chronoqa/verbalizer.hpp"

namespace chronoqa {

inline constexpr int kDefaultTopK = 50;

enum class IndexBackend { Exact, Approximate };

const char* to_string(IndexBackend b);
IndexBackend index_backend_from_string(const std::string& s);

struct RetrievalResult {
    std::int64_t fact_id = -1;
    double score = 0.0;  // cosine similarity in [-1, 1]
    int rank = 0;        // 1-based, consecutive
};

struct ApproximateOptions {
    int nlist = 0;          // coarse clusters; 0 picks ~sqrt(N)
    int nprobe = 0;         // clusters scanned per query; 0 picks ~40% of nlist
    int kmeans_iterations = 10;
    unsigned seed = 42;
};

// Immutable similarity index over verbalized facts. The Exact backend scans
// every entry; the Approximate backend partitions entries into coarse
// clusters (k-means) and scans the nprobe nearest ones.
class VectorIndex {
public:
    VectorIndex() = default;

    static VectorIndex build(const std::vector<VerbalizedFact>& facts, const Embedder& embedder,
                             IndexBackend backend = IndexBackend::Exact,
                             const ApproximateOptions& options = {});

    // Top-k entries by descending cosine score, ties broken by ascending
    // fact_id. Returns fewer than k results when the index is smaller.
    std::vector<RetrievalResult> search(const Embedding& query, int k) const;

    std::size_t size() const { return ids_.size(); }
    int dim() const { return dim_; }
    IndexBackend backend() const { return backend_; }

private:
    std::vector<RetrievalResult> scan(const Embedding& query, int k,
                                      const std::vector<std::int64_t>& candidates) const;

    IndexBackend backend_ = IndexBackend::Exact;
    int dim_ = 0;
    std::vector<std::int64_t> ids_;        // parallel to vectors_
    std::vector<Embedding> vectors_;
    // Approximate backend state.
    std::vector<Embedding> centroids_;
    std::vector<std::vector<std::int64_t>> clusters_;  // entry positions per centroid
    int nprobe_ = 0;
};

// Embeds the question and searches the index. k must be >= 1.
std::vector<RetrievalResult> retrieve(const std::string& question, const VectorIndex& index,
                                      const Embedder& embedder, int k = kDefaultTopK);

}  // namespace chronoqa
