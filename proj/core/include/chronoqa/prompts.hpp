#pragma once

#include <string>
#include <utility>
#include <vector>

namespace chronoqa {

enum class PromptStyle {
    QuestionAnswer,   // Q: ... / A: ...
    HistoricalFacts,  // Historical facts: ... / Question: ... / Answer: ...
    RelevantFacts,    // Relevant facts: ... / Question: ... / Answer: ...
    Aggregation,      // Question: ... / Candidate answer: ... / Output: ...
};

struct PromptTemplate {
    std::string template_id;
    PromptStyle style = PromptStyle::QuestionAnswer;
    std::string instruction;
    // Few-shot examples in fixed order: (input block, expected output). For
    // QuestionAnswer style the input is the bare question; for the fact
    // styles it is the pre-rendered block up to and including the
    // "Question:" line.
    std::vector<std::pair<std::string, std::string>> few_shot;
};

// Registered template ids.
inline constexpr const char* kTplDecomposeDirect = "decompose_direct";
inline constexpr const char* kTplDecomposeConstraint = "decompose_constraint";
inline constexpr const char* kTplReasonFacts = "reason_facts";
inline constexpr const char* kTplPickFirstLast = "pick_first_last";
inline constexpr const char* kTplAggregate = "aggregate";

// Throws UnknownTemplate for an unregistered id.
const PromptTemplate& get_template(const std::string& template_id);
std::vector<std::string> template_ids();

// Instruction, examples in order, then "Q: <question>\nA:".
std::string render_prompt(const PromptTemplate& tpl, const std::string& question);

// Fact-block layout: instruction, examples, then the facts (one per line),
// "Question: <question>" and a trailing answer label.
std::string render_prompt(const PromptTemplate& tpl, const std::string& question,
                          const std::vector<std::string>& fact_lines);

// Aggregation layout: question, labelled candidate sources, "Output:".
std::string render_aggregation_prompt(const PromptTemplate& tpl, const std::string& question,
                                      const std::vector<std::pair<std::string, std::string>>&
                                          sources);

}  // namespace chronoqa
