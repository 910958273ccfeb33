#include "chronoqa/index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "chronoqa/errors.hpp"

namespace chronoqa {

namespace {

struct Scored {
    std::int64_t fact_id;
    double score;
};

bool better(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fact_id < b.fact_id;
}

}  // namespace

const char* to_string(IndexBackend b) {
    return b == IndexBackend::Exact ? "exact" : "approximate";
}

IndexBackend index_backend_from_string(const std::string& s) {
    if (s == "exact") return IndexBackend::Exact;
    if (s == "approximate" || s == "ann") return IndexBackend::Approximate;
    throw ConfigError("unknown index backend: " + s);
}

VectorIndex VectorIndex::build(const std::vector<VerbalizedFact>& facts, const Embedder& embedder,
                               IndexBackend backend, const ApproximateOptions& options) {
    if (backend == IndexBackend::Approximate && facts.empty()) {
        throw Error("approximate index requires a non-empty corpus");
    }

    VectorIndex index;
    index.backend_ = backend;
    index.dim_ = embedder.dim();
    index.ids_.reserve(facts.size());
    index.vectors_.reserve(facts.size());
    for (const auto& fact : facts) {
        index.ids_.push_back(fact.fact_id);
        index.vectors_.push_back(embedder.embed(fact.text));
        if (index.dim_ == 0) index.dim_ = index.vectors_.back().dim();
    }
    if (backend == IndexBackend::Exact) return index;

    // Coarse k-means over the corpus. Seeded and single-threaded, so the
    // cluster assignment is a pure function of (corpus, options).
    const std::size_t n = index.vectors_.size();
    int nlist = options.nlist > 0
                    ? options.nlist
                    : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
    nlist = std::min<int>(nlist, static_cast<int>(n));
    index.nprobe_ = options.nprobe > 0
                        ? std::min(options.nprobe, nlist)
                        : std::max(1, (nlist * 2 + 4) / 5);

    std::mt19937 rng(options.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    index.centroids_.clear();
    for (int c = 0; c < nlist; ++c) {
        index.centroids_.push_back(index.vectors_[order[static_cast<std::size_t>(c)]]);
    }

    std::vector<int> assignment(n, 0);
    for (int iter = 0; iter < options.kmeans_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_score = cosine(index.vectors_[i], index.centroids_[0]);
            for (int c = 1; c < nlist; ++c) {
                double s = cosine(index.vectors_[i], index.centroids_[static_cast<std::size_t>(c)]);
                if (s > best_score) {
                    best_score = s;
                    best = c;
                }
            }
            assignment[i] = best;
        }
        std::vector<std::vector<double>> sums(
            static_cast<std::size_t>(nlist),
            std::vector<double>(static_cast<std::size_t>(index.dim_), 0.0));
        std::vector<int> counts(static_cast<std::size_t>(nlist), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (int d = 0; d < index.dim_; ++d) {
                sums[c][static_cast<std::size_t>(d)] +=
                    index.vectors_[i].values[static_cast<std::size_t>(d)];
            }
        }
        for (int c = 0; c < nlist; ++c) {
            auto cu = static_cast<std::size_t>(c);
            if (counts[cu] == 0) {
                // Re-seed an empty cluster with a random member.
                index.centroids_[cu] = index.vectors_[order[rng() % n]];
                continue;
            }
            double norm = 0.0;
            for (double v : sums[cu]) norm += v * v;
            norm = std::sqrt(norm);
            if (norm == 0.0) continue;
            for (int d = 0; d < index.dim_; ++d) {
                index.centroids_[cu].values[static_cast<std::size_t>(d)] =
                    static_cast<float>(sums[cu][static_cast<std::size_t>(d)] / norm);
            }
        }
    }

    index.clusters_.assign(static_cast<std::size_t>(nlist), {});
    for (std::size_t i = 0; i < n; ++i) {
        index.clusters_[static_cast<std::size_t>(assignment[i])].push_back(
            static_cast<std::int64_t>(i));
    }
    return index;
}

std::vector<RetrievalResult> VectorIndex::scan(const Embedding& query, int k,
                                               const std::vector<std::int64_t>& candidates) const {
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (std::int64_t pos : candidates) {
        auto i = static_cast<std::size_t>(pos);
        scored.push_back(Scored{ids_[i], cosine(query, vectors_[i])});
    }
    auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), better);
    std::vector<RetrievalResult> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        out.push_back(RetrievalResult{scored[i].fact_id, scored[i].score,
                                      static_cast<int>(i) + 1});
    }
    return out;
}

std::vector<RetrievalResult> VectorIndex::search(const Embedding& query, int k) const {
    if (k < 1) throw Error("k must be at least 1");
    if (query.dim() != dim_ && !ids_.empty()) throw Error("query dimension mismatch");

    if (backend_ == IndexBackend::Exact || clusters_.empty()) {
        std::vector<std::int64_t> all(ids_.size());
        std::iota(all.begin(), all.end(), 0);
        return scan(query, k, all);
    }

    // Rank centroids, gather the candidate lists of the best nprobe.
    std::vector<Scored> ranked;
    ranked.reserve(centroids_.size());
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        ranked.push_back(Scored{static_cast<std::int64_t>(c), cosine(query, centroids_[c])});
    }
    std::sort(ranked.begin(), ranked.end(), better);
    std::vector<std::int64_t> candidates;
    for (int p = 0; p < nprobe_ && p < static_cast<int>(ranked.size()); ++p) {
        const auto& members = clusters_[static_cast<std::size_t>(ranked[static_cast<std::size_t>(p)].fact_id)];
        candidates.insert(candidates.end(), members.begin(), members.end());
    }
    return scan(query, k, candidates);
}

std::vector<RetrievalResult> retrieve(const std::string& question, const VectorIndex& index,
                                      const Embedder& embedder, int k) {
    if (k < 1) throw Error("k must be at least 1");
    if (index.size() == 0) return {};
    return index.search(embedder.embed(question), k);
}

}  // namespace chronoqa
