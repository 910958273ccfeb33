#include <benchmark/benchmark.h>

#include <random>

#include "chronoqa/aggregator.hpp"
#include "chronoqa/embedder.hpp"
#include "chronoqa/index.hpp"
#include "chronoqa/solver.hpp"
#include "chronoqa/timestamp.hpp"
#include "chronoqa/verbalizer.hpp"

namespace {

using namespace chronoqa;

std::vector<VerbalizedFact> make_corpus(std::size_t n) {
    const char* subjects[] = {"France", "China", "Qatar", "Barack Obama", "Wen Jiabao"};
    const char* predicates[] = {"Make a visit", "Host a visit", "Reject", "Praise or endorse"};
    std::mt19937 rng(7);
    std::vector<VerbalizedFact> corpus;
    corpus.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TemporalFact f = TemporalFact::point(
            subjects[rng() % 5], predicates[rng() % 4], subjects[rng() % 5],
            TimeStamp::of_day(2005 + static_cast<int>(rng() % 10),
                              1 + static_cast<int>(rng() % 12),
                              1 + static_cast<int>(rng() % 28)));
        f.fact_id = static_cast<std::int64_t>(i);
        corpus.push_back(verbalize(f));
    }
    return corpus;
}

void BM_ParseTimestamp(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_timestamp("2009-05-12"));
    }
}
BENCHMARK(BM_ParseTimestamp);

void BM_StandardizeTime(benchmark::State& state) {
    const std::string question = "Before 14 October 2015, who visited Guatemala on 7 July 2007?";
    for (auto _ : state) {
        benchmark::DoNotOptimize(standardize_time(question));
    }
}
BENCHMARK(BM_StandardizeTime);

void BM_EmbedText(benchmark::State& state) {
    HashedNgramEmbedder embedder(static_cast<int>(state.range(0)));
    const std::string text = "Georgios Papandreou Make a visit China in 2009-05-12";
    for (auto _ : state) {
        benchmark::DoNotOptimize(embedder.embed(text));
    }
}
BENCHMARK(BM_EmbedText)->Arg(128)->Arg(256)->Arg(1024);

void BM_BuildIndex(benchmark::State& state) {
    HashedNgramEmbedder embedder(128);
    auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(VectorIndex::build(corpus, embedder));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(1000)->Arg(10000);

void BM_Retrieve(benchmark::State& state) {
    HashedNgramEmbedder embedder(128);
    auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
    VectorIndex index = VectorIndex::build(corpus, embedder);
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrieve("Who visited France in 2009-05?", index, embedder, 50));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Retrieve)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_RetrieveApproximate(benchmark::State& state) {
    HashedNgramEmbedder embedder(128);
    auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
    VectorIndex index = VectorIndex::build(corpus, embedder, IndexBackend::Approximate);
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrieve("Who visited France in 2009-05?", index, embedder, 50));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RetrieveApproximate)->Arg(10000)->Arg(100000);

void BM_AggregateRules(benchmark::State& state) {
    CandidateSet set = CandidateSet::of(Answer::entity("Sri Lanka"), Answer::entity("China"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(aggregate(set, "q?", nullptr, AggregationMode::Rules));
    }
}
BENCHMARK(BM_AggregateRules);

}  // namespace

BENCHMARK_MAIN();
