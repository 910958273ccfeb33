#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chronoqa/answer.hpp"
#include "chronoqa/llm.hpp"

namespace chronoqa {

enum class AggregationMode { Rules, LlmAssisted };

const char* to_string(AggregationMode m);
AggregationMode aggregation_mode_from_string(const std::string& s);

enum class SourceLabel { A, B, C };

const char* to_string(SourceLabel l);

// Ordered candidate answers: A is the direct IR answer on the node's own
// question, B the child-derived answer, C an optional third source.
struct CandidateSet {
    struct Candidate {
        SourceLabel label;
        Answer answer;
    };
    std::vector<Candidate> sources;

    static CandidateSet of(Answer a, Answer b);
    static CandidateSet of(Answer a, Answer b, Answer c);

    // 2 or 3 sources, labels unique and in order A, B[, C].
    void validate() const;
};

struct AggregateOptions {
    std::string model_id = "gpt-4o-mini";
    double temperature = 0.0;
};

// Selects the final answer by strict precedence (highest-priority valid
// source wins: C over B over A; Unknown when none is valid). LlmAssisted mode
// asks the model to apply the same rules and falls back to Rules on any
// parse failure. Total: never throws for well-formed candidate sets.
Answer aggregate(const CandidateSet& candidates, const std::string& question,
                 LlmGateway* gateway, AggregationMode mode,
                 const AggregateOptions& options = {}, int* llm_calls = nullptr);

}  // namespace chronoqa
