#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chronoqa/embedder.hpp"
#include "chronoqa/errors.hpp"
#include "chronoqa/index.hpp"

#include "support/synthetic.hpp"

using namespace chronoqa;

namespace {

// Independent oracle: score every entry, full stable sort, take k.
std::vector<RetrievalResult> brute_force_topk(const std::vector<VerbalizedFact>& corpus,
                                              const Embedder& embedder, const std::string& query,
                                              int k) {
    Embedding q = embedder.embed(query);
    std::vector<RetrievalResult> scored;
    for (const auto& vf : corpus) {
        scored.push_back(RetrievalResult{vf.fact_id, cosine(q, embedder.embed(vf.text)), 0});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fact_id < b.fact_id;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = static_cast<int>(i) + 1;
    return scored;
}

}  // namespace

TEST_SUITE("retriever") {

TEST_CASE("embeddings are deterministic and L2-normalized") {
    HashedNgramEmbedder embedder(256);
    Embedding a = embedder.embed("Kuwait visit");
    Embedding b = embedder.embed("Kuwait visit");
    CHECK(a.values == b.values);
    CHECK(std::abs(a.norm() - 1.0) < 1e-6);
    CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("shared n-grams score higher than unrelated text") {
    HashedNgramEmbedder embedder(256);
    double related = cosine(embedder.embed("Kuwait visit"), embedder.embed("Kuwait visit 2014"));
    double unrelated =
        cosine(embedder.embed("Kuwait visit"), embedder.embed("grain exports Brazil"));
    CHECK(related > unrelated);
}

TEST_CASE("embedding empty or whitespace text fails loudly") {
    HashedNgramEmbedder embedder(64);
    CHECK_THROWS_AS(embedder.embed(""), EmbedderUnavailable);
    CHECK_THROWS_AS(embedder.embed("   "), EmbedderUnavailable);
}

TEST_CASE("index holds one entry per fact") {
    HashedNgramEmbedder embedder(128);
    auto corpus = testing::synthetic_corpus(25, 21);
    VectorIndex index = VectorIndex::build(corpus, embedder);
    CHECK(index.size() == 25);
}

TEST_CASE("empty exact index returns empty results") {
    HashedNgramEmbedder embedder(128);
    VectorIndex index = VectorIndex::build({}, embedder, IndexBackend::Exact);
    CHECK(index.size() == 0);
    CHECK(retrieve("anything", index, embedder, 10).empty());
}

TEST_CASE("approximate backend rejects an empty corpus") {
    HashedNgramEmbedder embedder(128);
    CHECK_THROWS_AS(VectorIndex::build({}, embedder, IndexBackend::Approximate), Error);
}

TEST_CASE("k larger than the corpus returns everything, ranked") {
    HashedNgramEmbedder embedder(128);
    auto corpus = testing::synthetic_corpus(8, 23);
    VectorIndex index = VectorIndex::build(corpus, embedder);
    auto results = retrieve("Who visited France?", index, embedder, 50);
    CHECK(results.size() == 8);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].rank == static_cast<int>(i) + 1);
        if (i > 0) CHECK(results[i - 1].score >= results[i].score);
        CHECK(results[i].score <= 1.0 + 1e-9);
        CHECK(results[i].score >= -1.0 - 1e-9);
    }
}

TEST_CASE("exact retrieval equals the brute-force oracle") {
    HashedNgramEmbedder embedder(128);
    auto corpus = testing::synthetic_corpus(300, 29);
    VectorIndex index = VectorIndex::build(corpus, embedder);
    std::mt19937 rng(31);
    auto facts = testing::synthetic_facts(300, 29);
    for (int trial = 0; trial < 25; ++trial) {
        std::string query = testing::question_for(facts[rng() % facts.size()], rng);
        for (int k : {1, 10, 50}) {
            auto got = retrieve(query, index, embedder, k);
            auto expected = brute_force_topk(corpus, embedder, query, k);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].fact_id == expected[i].fact_id);
                CHECK(got[i].score == expected[i].score);
                CHECK(got[i].rank == expected[i].rank);
            }
        }
    }
}

TEST_CASE("ties break by ascending fact_id") {
    // Identical texts give identical vectors, hence exact score ties.
    std::vector<VerbalizedFact> corpus = {
        {0, "France Make a visit China in 2009-05-07"},
        {1, "France Make a visit China in 2009-05-07"},
        {2, "France Make a visit China in 2009-05-07"},
    };
    HashedNgramEmbedder embedder(64);
    VectorIndex index = VectorIndex::build(corpus, embedder);
    auto results = retrieve("France Make a visit China in 2009-05-07", index, embedder, 3);
    REQUIRE(results.size() == 3);
    CHECK(results[0].fact_id == 0);
    CHECK(results[1].fact_id == 1);
    CHECK(results[2].fact_id == 2);
}

TEST_CASE("retrieval is a stable function of corpus, query and k") {
    HashedNgramEmbedder embedder(128);
    auto corpus = testing::synthetic_corpus(150, 37);
    VectorIndex index_a = VectorIndex::build(corpus, embedder);
    VectorIndex index_b = VectorIndex::build(corpus, embedder);
    auto a = retrieve("Who praised Vietnam?", index_a, embedder, 20);
    auto b = retrieve("Who praised Vietnam?", index_b, embedder, 20);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].fact_id == b[i].fact_id);
        CHECK(a[i].score == b[i].score);
    }
}

TEST_CASE("approximate backend overlaps exact top-10 with recall >= 0.95") {
    HashedNgramEmbedder embedder(128);
    auto corpus = testing::synthetic_corpus(1000, 41);
    VectorIndex exact = VectorIndex::build(corpus, embedder, IndexBackend::Exact);
    VectorIndex approx = VectorIndex::build(corpus, embedder, IndexBackend::Approximate);

    std::mt19937 rng(43);
    auto facts = testing::synthetic_facts(1000, 41);
    double overlap_total = 0.0;
    int trials = 50;
    for (int t = 0; t < trials; ++t) {
        std::string query = testing::question_for(facts[rng() % facts.size()], rng);
        auto gold = retrieve(query, exact, embedder, 10);
        auto got = retrieve(query, approx, embedder, 10);
        std::size_t hits = 0;
        for (const auto& g : gold) {
            for (const auto& r : got) {
                if (r.fact_id == g.fact_id) {
                    ++hits;
                    break;
                }
            }
        }
        overlap_total += static_cast<double>(hits) / static_cast<double>(gold.size());
    }
    CHECK(overlap_total / trials >= 0.95);
}

TEST_CASE("monotone recall of a known fact as k grows") {
    HashedNgramEmbedder embedder(128);
    auto facts = testing::synthetic_facts(400, 47);
    auto corpus = testing::synthetic_corpus(400, 47);
    VectorIndex index = VectorIndex::build(corpus, embedder);
    std::mt19937 rng(49);
    for (int trial = 0; trial < 10; ++trial) {
        const TemporalFact& gold = facts[rng() % facts.size()];
        std::string query = testing::question_for(gold, rng);
        double previous = 0.0;
        for (int k : {5, 20, 50, 100, 400}) {
            auto results = retrieve(query, index, embedder, k);
            double found = 0.0;
            for (const auto& r : results) {
                if (r.fact_id == gold.fact_id) found = 1.0;
            }
            CHECK(found >= previous);
            previous = found;
        }
        CHECK(previous == 1.0);  // full scan always contains the gold fact
    }
}

TEST_CASE("remote embedder fetches, normalizes and caches") {
    std::atomic<int> hits{0};
    httplib::Server server;
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.at("model") == "test-embedder");
        // Deliberately unnormalized (norm 5).
        nlohmann::json reply{{"data", {{{"embedding", {3.0, 4.0, 0.0, 0.0}}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "chronoqa_remote_embed_test";
    fs::remove_all(dir);

    RemoteEmbedderConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.model = "test-embedder";
    RemoteEmbedder embedder(config, EmbeddingCache(dir));

    Embedding first = embedder.embed("some text");
    CHECK(first.dim() == 4);
    CHECK(std::abs(first.norm() - 1.0) < 1e-6);
    CHECK(first.values[0] == doctest::Approx(0.6));
    CHECK(first.values[1] == doctest::Approx(0.8));
    CHECK(embedder.dim() == 4);

    // Second call is served from the on-disk cache.
    Embedding second = embedder.embed("some text");
    CHECK(second.values == first.values);
    CHECK(hits == 1);

    server.stop();
    server_thread.join();

    // With the server gone, cached texts still embed; new texts fail loudly.
    RemoteEmbedder offline(config, EmbeddingCache(dir));
    CHECK(offline.embed("some text").values == first.values);
    CHECK_THROWS_AS(offline.embed("never seen"), EmbedderUnavailable);
}

TEST_CASE("embedding cache round-trips vectors byte-exactly") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "chronoqa_embed_cache_test";
    fs::remove_all(dir);
    EmbeddingCache cache(dir);
    HashedNgramEmbedder embedder(96);
    Embedding original = embedder.embed("Wen Jiabao Make a visit China in 2009-05-08");
    CHECK(!cache.get("test-backend", "some text").has_value());
    cache.put("test-backend", "some text", original);
    auto loaded = cache.get("test-backend", "some text");
    REQUIRE(loaded.has_value());
    CHECK(loaded->values == original.values);
    // Different backend id maps to a different key.
    CHECK(!cache.get("other-backend", "some text").has_value());
}

}  // TEST_SUITE
