#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chronoqa/aggregator.hpp"
#include "chronoqa/answer.hpp"
#include "chronoqa/decomposer.hpp"
#include "chronoqa/index.hpp"
#include "chronoqa/llm.hpp"
#include "chronoqa/store.hpp"
#include "chronoqa/verbalizer.hpp"

namespace chronoqa {

// Rewrites natural-language time phrases ("January 2010", "7 July 2007",
// "July 7, 2007") to ISO prefix form at the matching granularity. Text
// without time phrases passes through unchanged; the function is idempotent.
std::string standardize_time(const std::string& question);

// Replaces every #j token with the rendered value of prior_answers[j].
// Throws MissingPlaceholderAnswer when a referenced answer is absent.
std::string replace_placeholders(const std::string& question,
                                 const std::map<int, Answer>& prior_answers);

struct SolveConfig {
    int top_k = kDefaultTopK;
    int max_depth = 4;
    AggregationMode aggregation = AggregationMode::Rules;
    std::string reason_model = "deepseek-v3";
    std::string aggregate_model = "gpt-4o-mini";
    double temperature = 0.0;
    // When set, before/after constraints in the question are checked against
    // answered timestamps; violations are flagged in the trace, never
    // overridden.
    bool flag_temporal_violations = false;
};

// Retrieval + LLM reasoning on one question. The answer is parsed from the
// text after the final "So the answer is:" anchor; a missing anchor yields
// Unknown with the raw response preserved in the chain.
Answer reason(const std::string& question, const std::vector<std::string>& fact_lines,
              const std::string& template_id, LlmGateway& gateway,
              const std::string& model_id, double temperature = 0.0);

// Child-answer roll-up for a non-leaf node: the last child's answer when
// valid (the final sub-question resolves the parent by construction),
// otherwise an LLM adjudication over the remaining valid child answers.
// Degrades to Unknown when every child is invalid.
Answer summarize(const std::string& question, const std::vector<Answer>& child_answers,
                 LlmGateway& gateway, const SolveConfig& config, int* llm_calls = nullptr);

struct SolveTrace {
    int node_idx = -1;
    std::string question;  // after placeholder substitution and normalization
    std::vector<std::int64_t> retrieved_fact_ids;
    std::vector<std::string> fact_lines;  // prompt context, verbatim
    std::optional<Answer> ir_answer;
    std::optional<Answer> child_answer;
    Answer final_answer;
    int llm_calls = 0;
    int completion_seq = 0;  // post-order completion counter
    std::vector<std::string> warnings;
};

struct SolveResult {
    std::map<int, SolveTrace> traces;  // by node idx
    Answer final_answer;
    int llm_calls = 0;
    // Ranked prediction strings: final answer, remaining distinct candidate
    // answers, then distinct entities from the root's retrieved facts.
    std::vector<std::string> predictions;
};

// Recursive post-order resolution of a query tree against one fact index.
class Solver {
public:
    Solver(const TkgStore& store, const std::vector<VerbalizedFact>& corpus,
           const VectorIndex& index, const Embedder& embedder, LlmGateway& gateway,
           SolveConfig config);

    SolveResult solve_tree(const QueryTree& tree);

private:
    struct NodeOutcome {
        Answer answer;
        int trace_idx;
    };

    SolveTrace& solve_node(const QueryTree& tree, int idx, const std::string& substituted,
                           const std::map<int, Answer>& sibling_answers, int depth,
                           SolveResult& result);
    Answer reason_by_retrieval(const std::string& question, SolveTrace& trace);
    void maybe_flag_violations(const std::string& question, SolveTrace& trace) const;

    const TkgStore& store_;
    const std::vector<VerbalizedFact>& corpus_;
    const VectorIndex& index_;
    const Embedder& embedder_;
    LlmGateway& gateway_;
    SolveConfig config_;
    int seq_ = 0;
};

// True for adjudication leaves like "Who was the last one among them?" that
// pick the first/last entry from a prior sibling's candidate list instead of
// retrieving from the corpus.
bool is_adjudication_question(const std::string& question);

}  // namespace chronoqa
