#include <random>

#include <doctest.h>

#include "chronoqa/errors.hpp"
#include "chronoqa/eval.hpp"

#include "support/synthetic.hpp"

using namespace chronoqa;

namespace {

EvalRecord record_with(std::vector<Answer> predictions, std::vector<std::string> gold) {
    EvalRecord r;
    r.predictions = std::move(predictions);
    r.gold = std::move(gold);
    score_record(r);
    return r;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("match_answer: entity normalization") {
    CHECK(match_answer(Answer::entity("Wen Jiabao"), {"Wen Jiabao"}));
    CHECK(match_answer(Answer::entity("  wen   jiabao "), {"Wen Jiabao"}));
    CHECK(match_answer(Answer::entity("[Wen Jiabao]"), {"Wen Jiabao"}));
    CHECK(!match_answer(Answer::entity("Wen"), {"Wen Jiabao"}));
    CHECK(!match_answer(Answer::unknown(), {"Unknown"}));
    CHECK(!match_answer(Answer::error(), {"Error"}));
}

TEST_CASE("match_answer: any listed entity matches") {
    Answer list = Answer::entity_time_list({{"Stephen W. Bosworth", parse_timestamp("2009-05-08")},
                                            {"Wen Jiabao", parse_timestamp("2009-05-08")}});
    CHECK(match_answer(list, {"Wen Jiabao"}));
    CHECK(match_answer(list, {"stephen w. bosworth"}));
    CHECK(!match_answer(list, {"Laos"}));
}

TEST_CASE("match_answer: timestamps compare at the coarser granularity") {
    CHECK(match_answer(Answer::timestamp(parse_timestamp("2008")), {"2008"}));
    CHECK(match_answer(Answer::timestamp(parse_timestamp("2012-09-04")), {"2012-09"}));
    CHECK(match_answer(Answer::timestamp(parse_timestamp("2012-09")), {"2012-09-04"}));
    CHECK(!match_answer(Answer::timestamp(parse_timestamp("2012-10-04")), {"2012-09"}));
    CHECK(!match_answer(Answer::timestamp(parse_timestamp("2011")), {"2012-09"}));
}

TEST_CASE("hits_at_k over simple record sets") {
    std::vector<EvalRecord> records;
    records.push_back(record_with({Answer::entity("right")}, {"right"}));
    CHECK(hits_at_k(records, 1) == doctest::Approx(1.0));

    records.push_back(record_with({Answer::entity("wrong")}, {"right"}));
    records.push_back(record_with({Answer::entity("right")}, {"right"}));
    records.push_back(record_with({Answer::entity("right")}, {"right"}));
    CHECK(hits_at_k(records, 1) == doctest::Approx(0.75));

    // A match at rank 3 counts for k=10 but not k=1.
    records.push_back(record_with(
        {Answer::entity("a"), Answer::entity("b"), Answer::entity("right")}, {"right"}));
    CHECK(hits_at_k(records, 1) == doctest::Approx(0.6));
    CHECK(hits_at_k(records, 10) == doctest::Approx(0.8));
}

TEST_CASE("hits_at_k rejects an empty record set") {
    CHECK_THROWS_AS(hits_at_k({}, 1), EmptyRecordSet);
}

TEST_CASE("hit1 implies hit10 on randomized records") {
    std::mt19937 rng(71);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> rank(0, 12);
    for (int i = 0; i < 300; ++i) {
        std::vector<Answer> predictions;
        int gold_rank = rank(rng);
        for (int p = 0; p < 13; ++p) {
            predictions.push_back(Answer::entity(p == gold_rank && coin(rng) ? "gold" : "other" +
                                                                                  std::to_string(p)));
        }
        EvalRecord r = record_with(std::move(predictions), {"gold"});
        if (r.hit1) CHECK(r.hit10);
    }
}

TEST_CASE("recall_at_n counts gold coverage") {
    std::vector<RetrievalResult> retrieved = {{1, 0.9, 1}, {5, 0.8, 2}, {9, 0.7, 3}};
    CHECK(recall_at_n(retrieved, {1, 2}) == doctest::Approx(0.5));
    CHECK(recall_at_n(retrieved, {1, 5, 9}) == doctest::Approx(1.0));
    CHECK(recall_at_n({}, {1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(recall_at_n(retrieved, {}), UndefinedRecall);
}

TEST_CASE("recall_curve is monotone and skips unannotated questions") {
    std::mt19937 rng(73);
    std::vector<std::vector<RetrievalResult>> retrieved;
    std::vector<std::set<std::int64_t>> golds;
    for (int q = 0; q < 20; ++q) {
        std::vector<RetrievalResult> list;
        for (int i = 0; i < 60; ++i) {
            list.push_back(RetrievalResult{static_cast<std::int64_t>(rng() % 500),
                                           1.0 - i * 0.01, i + 1});
        }
        retrieved.push_back(std::move(list));
        std::set<std::int64_t> gold;
        if (q % 5 != 0) {  // every fifth question lacks annotations
            for (int g = 0; g < 4; ++g) gold.insert(static_cast<std::int64_t>(rng() % 500));
        }
        golds.push_back(std::move(gold));
    }
    auto curve = recall_curve(retrieved, golds, {10, 20, 30, 40, 50, 60});
    REQUIRE(curve.size() == 6);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].mean_recall >= curve[i - 1].mean_recall);
    }
    for (const auto& p : curve) {
        CHECK(p.questions == 16);
        CHECK(p.excluded == 4);
    }
}

TEST_CASE("tree_stats matches hand-computed values") {
    // Leaf-only tree.
    CHECK(tree_stats({TreeStatsInput{0, 0.0, 2}}).avg_depth == doctest::Approx(0.0));
    // The case-study tree: depth 1, branch 3.
    TreeStats one = tree_stats({TreeStatsInput{1, 3.0, 5}});
    CHECK(one.avg_depth == doctest::Approx(1.0));
    CHECK(one.avg_branch == doctest::Approx(3.0));
    CHECK(one.avg_api_calls == doctest::Approx(5.0));
    // Averaging.
    TreeStats avg = tree_stats({TreeStatsInput{0, 0.0, 2}, TreeStatsInput{1, 3.0, 5},
                                TreeStatsInput{2, 1.5, 8}});
    CHECK(avg.avg_depth == doctest::Approx(1.0));
    CHECK(avg.avg_branch == doctest::Approx(1.5));
    CHECK(avg.avg_api_calls == doctest::Approx(5.0));

    CHECK_THROWS_AS(tree_stats({}), EmptyRecordSet);
}

TEST_CASE("summary aggregates per category and respects totals") {
    std::vector<EvalRecord> records;
    auto add = [&](Category c, AnswerType t, bool hit) {
        EvalRecord r = record_with({Answer::entity(hit ? "gold" : "miss")}, {"gold"});
        r.qtype = question_type(c);
        r.answer_type = t;
        r.question_id = "q" + std::to_string(records.size());
        records.push_back(std::move(r));
    };
    add(Category::Equal, AnswerType::Entity, true);
    add(Category::Equal, AnswerType::Time, false);
    add(Category::BeforeLast, AnswerType::Entity, true);
    add(Category::AfterFirst, AnswerType::Entity, false);

    EvalSummary s = summarize_records(records);
    CHECK(s.overall.count == 4);
    CHECK(s.overall.hits1 == doctest::Approx(0.5));
    CHECK(s.by_complexity.at("Single").count == 2);
    CHECK(s.by_complexity.at("Multiple").count == 2);
    // Category totals sum to the overall count.
    std::size_t total = 0;
    for (const auto& [cat, m] : s.by_category) total += m.count;
    CHECK(total == s.overall.count);
    std::size_t answer_total = 0;
    for (const auto& [t, m] : s.by_answer_type) answer_total += m.count;
    CHECK(answer_total == s.overall.count);

    CHECK_THROWS_AS(summarize_records({}), EmptyRecordSet);

    // Rendering produces the three table blocks.
    std::string tables = render_summary_tables(s);
    CHECK(tables.find("Overall") != std::string::npos);
    CHECK(tables.find("Question Type") != std::string::npos);
    CHECK(tables.find("Avg API Call") != std::string::npos);
}

TEST_CASE("granularity breakdown lands in the category table") {
    std::vector<EvalRecord> records;
    EvalRecord r = record_with({Answer::timestamp(parse_timestamp("2008"))}, {"2008"});
    r.qtype = question_type(Category::Equal);
    r.answer_type = AnswerType::Time;
    r.time_granularity = Granularity::Year;
    records.push_back(r);
    EvalSummary s = summarize_records(records);
    CHECK(s.by_category_granularity.at("equal").at("year").count == 1);
    CHECK(s.by_category_granularity.at("equal").at("year").hits1 == doctest::Approx(1.0));
}

TEST_CASE("recall table renders the context-limit layout") {
    std::vector<RecallCurvePoint> curve = {{10, 0.5345, 50, 0}, {20, 0.6242, 50, 0}};
    std::map<int, double> hits = {{10, 0.704}, {20, 0.738}};
    std::string table = render_recall_table(curve, &hits);
    CHECK(table.find("Context Length") != std::string::npos);
    CHECK(table.find("n=10") != std::string::npos);
    CHECK(table.find("53.45%") != std::string::npos);
    CHECK(table.find("70.40%") != std::string::npos);
}

}  // TEST_SUITE
