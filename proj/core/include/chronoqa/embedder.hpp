#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chronoqa {

// An L2-normalized dense vector.
struct Embedding {
    std::vector<float> values;

    int dim() const { return static_cast<int>(values.size()); }
    double norm() const;
    void normalize();  // throws EmbedderUnavailable on an all-zero vector
};

// Inner product; equals cosine similarity because embeddings are normalized.
double cosine(const Embedding& a, const Embedding& b);

class Embedder {
public:
    virtual ~Embedder() = default;

    // Identifier that distinguishes incompatible vector spaces. Cached
    // embeddings are keyed on it.
    virtual std::string backend_id() const = 0;
    virtual int dim() const = 0;

    // Embeds one non-empty text. Deterministic per backend.
    virtual Embedding embed(const std::string& text) const = 0;
};

// Deterministic offline embedder: lowercased character n-grams hashed into a
// fixed-dimension vector (FNV-1a, sign bit from the hash), then L2-normalized.
// The whole pipeline runs with zero network access on top of it.
class HashedNgramEmbedder final : public Embedder {
public:
    explicit HashedNgramEmbedder(int dim = 256, int ngram = 3);

    std::string backend_id() const override;
    int dim() const override { return dim_; }
    Embedding embed(const std::string& text) const override;

private:
    int dim_;
    int ngram_;
};

// Content-addressed on-disk embedding store. Keys are SHA-256 of
// (backend-id, text); values are a little-endian uint32 dim header followed
// by dim little-endian float32 values. Writes are atomic (temp + rename), so
// concurrent inserts are safe (last write wins; values are deterministic per
// key anyway).
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir);

    static std::string key(const std::string& backend_id, const std::string& text);

    std::optional<Embedding> get(const std::string& backend_id, const std::string& text) const;
    void put(const std::string& backend_id, const std::string& text, const Embedding& e) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
};

struct RemoteEmbedderConfig {
    std::string base_url;  // OpenAI-compatible, e.g. "https://host/v1"
    std::string model;
    std::string api_key_env = "EMBEDDER_API_KEY";
    int dim = 0;  // expected dimension; 0 accepts whatever the server returns
    int timeout_sec = 60;
};

// Calls an OpenAI-compatible /embeddings endpoint and caches every result.
// Vectors are re-normalized on arrival so the index invariant holds no matter
// what the server returns.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(RemoteEmbedderConfig config, EmbeddingCache cache);

    std::string backend_id() const override;
    int dim() const override { return dim_; }
    Embedding embed(const std::string& text) const override;

private:
    Embedding fetch(const std::string& text) const;

    RemoteEmbedderConfig config_;
    EmbeddingCache cache_;
    mutable int dim_;
};

}  // namespace chronoqa
