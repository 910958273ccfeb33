#include "chronoqa/embedder.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"
#include "digest.hpp"
#include "http_url.hpp"

namespace chronoqa {

namespace {

constexpr double kNormTolerance = 1e-6;

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Lowercase and collapse whitespace runs to single spaces.
std::string canonicalize(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

void put_u32_le(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

double Embedding::norm() const {
    double sum = 0.0;
    for (float v : values) sum += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(sum);
}

void Embedding::normalize() {
    double n = norm();
    if (n == 0.0) throw EmbedderUnavailable("embedding has zero norm");
    if (std::abs(n - 1.0) <= kNormTolerance) return;
    for (float& v : values) v = static_cast<float>(v / n);
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) throw Error("embedding dimension mismatch");
    double dot = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        dot += static_cast<double>(a.values[static_cast<std::size_t>(i)]) *
               static_cast<double>(b.values[static_cast<std::size_t>(i)]);
    }
    return dot;
}

HashedNgramEmbedder::HashedNgramEmbedder(int dim, int ngram) : dim_(dim), ngram_(ngram) {
    if (dim < 2) throw ConfigError("embedder dimension must be at least 2");
    if (ngram < 1) throw ConfigError("n-gram size must be at least 1");
}

std::string HashedNgramEmbedder::backend_id() const {
    return "hashed-ngram/n=" + std::to_string(ngram_) + "/dim=" + std::to_string(dim_);
}

Embedding HashedNgramEmbedder::embed(const std::string& text) const {
    std::string canon = canonicalize(text);
    if (canon.empty()) throw EmbedderUnavailable("cannot embed empty text");

    Embedding e;
    e.values.assign(static_cast<std::size_t>(dim_), 0.0f);

    // Pad with one boundary space on each side so short tokens still produce
    // edge n-grams.
    std::string padded = " " + canon + " ";
    const std::size_t n = static_cast<std::size_t>(ngram_);
    if (padded.size() < n) padded.resize(n, ' ');
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        std::uint64_t h = fnv1a(std::string_view(padded).substr(i, n));
        std::size_t slot = static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
        float sign = (h >> 63) ? -1.0f : 1.0f;
        e.values[slot] += sign;
    }
    e.normalize();
    return e;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::key(const std::string& backend_id, const std::string& text) {
    std::string material;
    material.reserve(backend_id.size() + text.size() + 1);
    material += backend_id;
    material += '\x1e';
    material += text;
    return detail::sha256_hex(material);
}

std::filesystem::path EmbeddingCache::path_for(const std::string& key) const {
    return dir_ / (key + ".vec");
}

std::optional<Embedding> EmbeddingCache::get(const std::string& backend_id,
                                             const std::string& text) const {
    std::ifstream in(path_for(key(backend_id, text)), std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4) return std::nullopt;
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint32_t dim = get_u32_le(p);
    if (bytes.size() != 4 + 4ull * dim) return std::nullopt;
    Embedding e;
    e.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        std::uint32_t raw = get_u32_le(p + 4 + 4ull * i);
        float f;
        static_assert(sizeof(f) == sizeof(raw));
        std::memcpy(&f, &raw, sizeof(f));
        e.values[i] = f;
    }
    return e;
}

void EmbeddingCache::put(const std::string& backend_id, const std::string& text,
                         const Embedding& e) const {
    std::string bytes;
    bytes.reserve(4 + 4ull * static_cast<std::size_t>(e.dim()));
    put_u32_le(bytes, static_cast<std::uint32_t>(e.dim()));
    for (float v : e.values) {
        std::uint32_t raw;
        std::memcpy(&raw, &v, sizeof(raw));
        put_u32_le(bytes, raw);
    }
    auto final_path = path_for(key(backend_id, text));
    auto tmp_path = final_path;
    tmp_path += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write embedding cache entry: " + tmp_path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp_path, final_path);
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config, EmbeddingCache cache)
    : config_(std::move(config)), cache_(std::move(cache)), dim_(config_.dim) {
    if (config_.base_url.empty()) throw ConfigError("remote embedder requires a base URL");
    if (config_.model.empty()) throw ConfigError("remote embedder requires a model name");
}

std::string RemoteEmbedder::backend_id() const {
    return "remote/" + config_.model;
}

Embedding RemoteEmbedder::embed(const std::string& text) const {
    if (text.empty()) throw EmbedderUnavailable("cannot embed empty text");
    if (auto hit = cache_.get(backend_id(), text)) {
        if (dim_ == 0) dim_ = hit->dim();
        return *hit;
    }
    Embedding e = fetch(text);
    e.normalize();
    if (dim_ == 0) {
        dim_ = e.dim();
    } else if (e.dim() != dim_) {
        throw EmbedderUnavailable("remote embedder returned dimension " +
                                  std::to_string(e.dim()) + ", expected " + std::to_string(dim_));
    }
    cache_.put(backend_id(), text, e);
    return e;
}

Embedding RemoteEmbedder::fetch(const std::string& text) const {
    const char* key = std::getenv(config_.api_key_env.c_str());

    auto [origin, path_prefix] = detail::split_base_url(config_.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout_sec, 0);
    client.set_read_timeout(config_.timeout_sec, 0);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body{{"model", config_.model}, {"input", nlohmann::json::array({text})}};
    auto res = client.Post(path_prefix + "/embeddings", headers, body.dump(),
                           "application/json");
    if (!res) {
        throw EmbedderUnavailable("embedding request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw EmbedderUnavailable("embedding request returned status " +
                                  std::to_string(res->status));
    }
    try {
        auto j = nlohmann::json::parse(res->body);
        const auto& vec = j.at("data").at(0).at("embedding");
        Embedding e;
        e.values.reserve(vec.size());
        for (const auto& v : vec) e.values.push_back(v.get<float>());
        if (e.values.empty()) throw EmbedderUnavailable("embedding response was empty");
        return e;
    } catch (const nlohmann::json::exception& e) {
        throw EmbedderUnavailable(std::string("malformed embedding response: ") + e.what());
    }
}

}  // namespace chronoqa
