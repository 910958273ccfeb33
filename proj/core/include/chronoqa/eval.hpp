#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronoqa/answer.hpp"
#include "chronoqa/decomposer.hpp"
#include "chronoqa/index.hpp"

namespace chronoqa {

enum class AnswerType { Entity, Time };

const char* to_string(AnswerType t);
std::optional<AnswerType> answer_type_from_string(const std::string& s);

// One evaluated question.
struct EvalRecord {
    std::string question_id;
    QuestionType qtype;
    AnswerType answer_type = AnswerType::Entity;
    std::optional<Granularity> time_granularity;
    std::vector<Answer> predictions;  // ranked
    std::vector<std::string> gold;
    bool hit1 = false;
    bool hit10 = false;
    int api_calls = 0;
    int tree_depth = 0;
    double tree_branch = 0.0;
};

// Case-fold, trim, collapse whitespace and strip surrounding brackets.
std::string normalize_answer_text(const std::string& text);

// True when the prediction matches any gold string: by normalized equality
// for entities, by any listed entity for EntityTimeList predictions, and by
// ISO comparison truncated to the coarser granularity for timestamps.
bool match_answer(const Answer& prediction, const std::vector<std::string>& gold);

// Sets hit1/hit10 from the record's ranked predictions.
void score_record(EvalRecord& record);

// Fraction of records with a matching prediction in the top k. Throws
// EmptyRecordSet.
double hits_at_k(const std::vector<EvalRecord>& records, int k);

// |retrieved ∩ gold| / |gold| for one question. Throws UndefinedRecall when
// gold is empty.
double recall_at_n(const std::vector<RetrievalResult>& retrieved,
                   const std::set<std::int64_t>& gold_fact_ids);

struct RecallCurvePoint {
    int n = 0;
    double mean_recall = 0.0;
    std::size_t questions = 0;  // questions contributing to the mean
    std::size_t excluded = 0;   // questions without gold annotations
};

// Mean per-question Recall@n for each cutoff. A question's retrieved list is
// truncated to its first n entries; questions without gold annotations are
// excluded and counted.
std::vector<RecallCurvePoint> recall_curve(
    const std::vector<std::vector<RetrievalResult>>& retrieved_per_question,
    const std::vector<std::set<std::int64_t>>& gold_per_question, const std::vector<int>& ns);

struct TreeStatsInput {
    int depth = 0;
    double branch = 0.0;
    int api_calls = 0;
};

struct TreeStats {
    double avg_depth = 0.0;
    double avg_branch = 0.0;
    double avg_api_calls = 0.0;
};

// Averages over trees. Throws EmptyRecordSet.
TreeStats tree_stats(const std::vector<TreeStatsInput>& trees);

struct MetricPair {
    double hits1 = 0.0;
    double hits10 = 0.0;
    std::size_t count = 0;
};

struct EvalSummary {
    MetricPair overall;
    std::map<std::string, MetricPair> by_complexity;   // Single/Multiple/...
    std::map<std::string, MetricPair> by_answer_type;  // Entity/Time
    std::map<std::string, MetricPair> by_category;     // equal/before_after/...
    // category -> granularity -> metrics (only for records with granularity)
    std::map<std::string, std::map<std::string, MetricPair>> by_category_granularity;
    TreeStats trees;
};

EvalSummary summarize_records(const std::vector<EvalRecord>& records);

nlohmann::json summary_to_json(const EvalSummary& summary);

// Aligned-column text tables (overall/question-type/answer-type block,
// category x granularity block, tree statistics block).
std::string render_summary_tables(const EvalSummary& summary);

// Context-limit table: one row per cutoff, with an optional Hits@1 column
// when per-cutoff accuracy is available.
std::string render_recall_table(const std::vector<RecallCurvePoint>& curve,
                                const std::map<int, double>* hits1_by_n = nullptr);

}  // namespace chronoqa
