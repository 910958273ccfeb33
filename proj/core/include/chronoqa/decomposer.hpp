#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronoqa/llm.hpp"

namespace chronoqa {

enum class Category {
    Equal,
    BeforeAfter,
    FirstLast,
    EqualMulti,
    BeforeLast,
    AfterFirst,
    TimelineSimple,
    TimelineMedium,
    TimelineComplex,
};

enum class Complexity { Single, Multiple, Simple, Medium, Complex };

struct QuestionType {
    Category category = Category::Equal;
    Complexity complexity = Complexity::Single;

    bool operator==(const QuestionType&) const = default;
};

const char* to_string(Category c);
const char* to_string(Complexity c);
std::optional<Category> category_from_label(const std::string& label);
QuestionType question_type(Category c);

// Dataset-provided labels win; otherwise a keyword heuristic assigns the
// category. Unrecognized text falls back to Equal.
QuestionType classify_question(const std::string& question,
                               const std::optional<std::string>& dataset_hint = std::nullopt);

// Template id used to decompose questions of the given category.
const char* decompose_template_id(Category c);

struct DecompositionNode {
    int idx = -1;
    std::string question_text;
    std::vector<int> sons;          // child idx values, sibling order
    std::optional<int> fa;          // parent idx; empty for the root
    QuestionType qlabel;
    std::optional<std::string> gold_answer;  // root only

    bool is_leaf() const { return sons.empty(); }
};

// Hierarchical sub-question tree. Node ids are assigned in post-order
// (children before parents, siblings left to right), so the root carries the
// highest idx.
struct QueryTree {
    std::vector<DecompositionNode> nodes;  // indexed by idx
    int root_idx = -1;

    const DecompositionNode& root() const { return nodes.at(static_cast<std::size_t>(root_idx)); }
    const DecompositionNode& node(int idx) const {
        return nodes.at(static_cast<std::size_t>(idx));
    }

    // Longest root-to-leaf edge count (0 for a leaf-only tree).
    int depth() const;
    // Mean child count over non-leaf nodes; 0 for a leaf-only tree.
    double branch() const;

    // Checks structural invariants: unique ids, fa/sons consistency, single
    // root, acyclicity/reachability and placeholder discipline.
    void validate() const;

    nlohmann::json to_json() const;
    static QueryTree from_json(const nlohmann::json& j);
};

// Intermediate shape parsed from the LLM response before ids are assigned.
struct ParsedDecomposition {
    std::string question;
    std::vector<ParsedDecomposition> children;
};

// Strict parse of the decomposition response: a JSON object with exactly one
// top-level key whose value is a list of sub-questions (strings, or
// single-key objects for nested decompositions). Throws
// MalformedDecomposition.
ParsedDecomposition parse_decomposition(const std::string& llm_text);

// Assigns post-order ids and validates placeholder discipline (#j in the
// i-th sibling requires j < i) and the depth cap. root_question overrides the
// parsed top-level key, preserving the standardized input verbatim.
QueryTree build_tree(const std::string& root_question, const ParsedDecomposition& parsed,
                     const QuestionType& root_label, int max_depth = 4);

struct DecomposeOptions {
    std::string model_id = "gpt-4o-mini";
    double temperature = 0.0;
    int max_depth = 4;
    // When false, a response that stays unparseable after the JSON-repair
    // retry raises MalformedDecomposition instead of degrading.
    bool fallback_to_leaf = true;
};

struct DecomposeOutcome {
    QueryTree tree;
    int llm_calls = 0;
    bool fallback_leaf_only = false;  // parse failed twice; tree is the bare question
};

// Classify -> prompt -> LLM -> parse -> tree (with one JSON-repair retry and
// a leaf-only fallback). The root question_text is the time-standardized
// input question.
DecomposeOutcome decompose(const std::string& question, const QuestionType& qtype,
                           LlmGateway& gateway, const DecomposeOptions& options = {});

}  // namespace chronoqa
