#include "chronoqa/decomposer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <regex>

#include "chronoqa/errors.hpp"
#include "chronoqa/prompts.hpp"
#include "chronoqa/solver.hpp"

namespace chronoqa {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool contains_word(const std::string& haystack, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
        std::size_t end = pos + word.size();
        bool right_ok =
            end >= haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[end]));
        if (left_ok && right_ok) return true;
        pos = end;
    }
    return false;
}

const std::regex& placeholder_re() {
    static const std::regex re("#(\\d+)");
    return re;
}

}  // namespace

const char* to_string(Category c) {
    switch (c) {
        case Category::Equal: return "equal";
        case Category::BeforeAfter: return "before_after";
        case Category::FirstLast: return "first_last";
        case Category::EqualMulti: return "equal_multi";
        case Category::BeforeLast: return "before_last";
        case Category::AfterFirst: return "after_first";
        case Category::TimelineSimple: return "timeline_simple";
        case Category::TimelineMedium: return "timeline_medium";
        case Category::TimelineComplex: return "timeline_complex";
    }
    return "equal";
}

const char* to_string(Complexity c) {
    switch (c) {
        case Complexity::Single: return "Single";
        case Complexity::Multiple: return "Multiple";
        case Complexity::Simple: return "Simple";
        case Complexity::Medium: return "Medium";
        case Complexity::Complex: return "Complex";
    }
    return "Single";
}

std::optional<Category> category_from_label(const std::string& label) {
    std::string l = lower(label);
    std::replace(l.begin(), l.end(), ' ', '_');
    std::replace(l.begin(), l.end(), '-', '_');
    if (l == "equal") return Category::Equal;
    if (l == "before_after" || l == "beforeafter") return Category::BeforeAfter;
    if (l == "first_last" || l == "firstlast") return Category::FirstLast;
    if (l == "equal_multi" || l == "equalmulti") return Category::EqualMulti;
    if (l == "before_last" || l == "beforelast") return Category::BeforeLast;
    if (l == "after_first" || l == "afterfirst") return Category::AfterFirst;
    if (l == "simple" || l == "timeline_simple") return Category::TimelineSimple;
    if (l == "medium" || l == "timeline_medium") return Category::TimelineMedium;
    if (l == "complex" || l == "timeline_complex") return Category::TimelineComplex;
    return std::nullopt;
}

QuestionType question_type(Category c) {
    switch (c) {
        case Category::Equal:
        case Category::BeforeAfter:
        case Category::FirstLast:
            return QuestionType{c, Complexity::Single};
        case Category::EqualMulti:
        case Category::BeforeLast:
        case Category::AfterFirst:
            return QuestionType{c, Complexity::Multiple};
        case Category::TimelineSimple: return QuestionType{c, Complexity::Simple};
        case Category::TimelineMedium: return QuestionType{c, Complexity::Medium};
        case Category::TimelineComplex: return QuestionType{c, Complexity::Complex};
    }
    return QuestionType{};
}

QuestionType classify_question(const std::string& question,
                               const std::optional<std::string>& dataset_hint) {
    if (dataset_hint) {
        if (auto c = category_from_label(*dataset_hint)) return question_type(*c);
    }
    std::string q = lower(question);
    bool before = contains_word(q, "before");
    bool after = contains_word(q, "after");
    bool first = contains_word(q, "first") || contains_word(q, "earliest");
    bool last = contains_word(q, "last") || contains_word(q, "latest");

    if (before && (first || last)) return question_type(Category::BeforeLast);
    if (after && (first || last)) return question_type(Category::AfterFirst);
    if (before || after) return question_type(Category::BeforeAfter);
    if (first || last) return question_type(Category::FirstLast);
    return question_type(Category::Equal);
}

const char* decompose_template_id(Category c) {
    switch (c) {
        case Category::Equal:
        case Category::FirstLast:
        case Category::EqualMulti:
        case Category::TimelineSimple:
            return kTplDecomposeDirect;
        case Category::BeforeAfter:
        case Category::BeforeLast:
        case Category::AfterFirst:
        case Category::TimelineMedium:
        case Category::TimelineComplex:
            return kTplDecomposeConstraint;
    }
    return kTplDecomposeDirect;
}

// ---------------------------------------------------------------------------
// QueryTree

int QueryTree::depth() const {
    std::function<int(int)> walk = [&](int idx) {
        const auto& n = node(idx);
        int best = 0;
        for (int child : n.sons) best = std::max(best, 1 + walk(child));
        return best;
    };
    return walk(root_idx);
}

double QueryTree::branch() const {
    std::size_t non_leaf = 0;
    std::size_t children = 0;
    for (const auto& n : nodes) {
        if (!n.sons.empty()) {
            ++non_leaf;
            children += n.sons.size();
        }
    }
    if (non_leaf == 0) return 0.0;
    return static_cast<double>(children) / static_cast<double>(non_leaf);
}

void QueryTree::validate() const {
    if (nodes.empty()) throw MalformedDecomposition("tree has no nodes");
    if (root_idx < 0 || static_cast<std::size_t>(root_idx) >= nodes.size()) {
        throw MalformedDecomposition("root_idx out of range");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].idx != static_cast<int>(i)) {
            throw MalformedDecomposition("node idx " + std::to_string(nodes[i].idx) +
                                         " does not match its position");
        }
        if (nodes[i].question_text.empty()) {
            throw MalformedDecomposition("node " + std::to_string(i) + " has empty question");
        }
    }
    if (root().fa.has_value()) throw MalformedDecomposition("root must have no parent");

    // fa/sons consistency and single-parent property.
    std::vector<int> seen_parent(nodes.size(), -1);
    for (const auto& n : nodes) {
        for (int child : n.sons) {
            if (child < 0 || static_cast<std::size_t>(child) >= nodes.size()) {
                throw MalformedDecomposition("child idx out of range");
            }
            if (seen_parent[static_cast<std::size_t>(child)] != -1) {
                throw MalformedDecomposition("node " + std::to_string(child) +
                                             " has two parents");
            }
            seen_parent[static_cast<std::size_t>(child)] = n.idx;
            if (!node(child).fa || *node(child).fa != n.idx) {
                throw MalformedDecomposition("fa/sons mismatch at node " + std::to_string(child));
            }
        }
    }
    for (const auto& n : nodes) {
        if (n.idx == root_idx) continue;
        if (seen_parent[static_cast<std::size_t>(n.idx)] == -1) {
            throw MalformedDecomposition("node " + std::to_string(n.idx) +
                                         " unreachable from root");
        }
    }

    // Reachability from the root covers every node (acyclic by the
    // single-parent check above).
    std::vector<bool> visited(nodes.size(), false);
    std::function<void(int)> walk = [&](int idx) {
        if (visited[static_cast<std::size_t>(idx)]) {
            throw MalformedDecomposition("cycle through node " + std::to_string(idx));
        }
        visited[static_cast<std::size_t>(idx)] = true;
        for (int child : node(idx).sons) walk(child);
    };
    walk(root_idx);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!visited[i]) {
            throw MalformedDecomposition("node " + std::to_string(i) + " unreachable from root");
        }
    }

    // Placeholder discipline, sibling-local: #j in the i-th child (1-based)
    // requires 1 <= j < i.
    for (const auto& n : nodes) {
        for (std::size_t i = 0; i < n.sons.size(); ++i) {
            const auto& child = node(n.sons[i]);
            auto begin = std::sregex_iterator(child.question_text.begin(),
                                              child.question_text.end(), placeholder_re());
            for (auto it = begin; it != std::sregex_iterator(); ++it) {
                int j = std::stoi((*it)[1].str());
                if (j < 1 || static_cast<std::size_t>(j) > i) {
                    throw PlaceholderViolation(j, child.question_text);
                }
            }
        }
    }
}

nlohmann::json QueryTree::to_json() const {
    nlohmann::json out;
    out["root_idx"] = root_idx;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes) {
        nlohmann::json jn;
        jn["idx"] = n.idx;
        jn["question_text"] = n.question_text;
        jn["sons"] = n.sons;
        if (n.fa) {
            jn["fa"] = *n.fa;
        } else {
            jn["fa"] = nullptr;
        }
        jn["qlabel"] = to_string(n.qlabel.category);
        if (n.gold_answer) {
            jn["gold_answer"] = *n.gold_answer;
        } else {
            jn["gold_answer"] = nullptr;
        }
        arr.push_back(std::move(jn));
    }
    out["nodes"] = std::move(arr);
    return out;
}

QueryTree QueryTree::from_json(const nlohmann::json& j) {
    QueryTree tree;
    try {
        tree.root_idx = j.at("root_idx").get<int>();
        for (const auto& jn : j.at("nodes")) {
            DecompositionNode n;
            n.idx = jn.at("idx").get<int>();
            n.question_text = jn.at("question_text").get<std::string>();
            n.sons = jn.at("sons").get<std::vector<int>>();
            if (jn.contains("fa") && !jn.at("fa").is_null()) n.fa = jn.at("fa").get<int>();
            if (auto c = category_from_label(jn.at("qlabel").get<std::string>())) {
                n.qlabel = question_type(*c);
            }
            if (jn.contains("gold_answer") && !jn.at("gold_answer").is_null()) {
                n.gold_answer = jn.at("gold_answer").get<std::string>();
            }
            tree.nodes.push_back(std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDecomposition(std::string("bad tree JSON: ") + e.what());
    }
    std::sort(tree.nodes.begin(), tree.nodes.end(),
              [](const auto& a, const auto& b) { return a.idx < b.idx; });
    tree.validate();
    return tree;
}

// ---------------------------------------------------------------------------
// Response parsing and tree construction

namespace {

// The model occasionally wraps JSON in a ```json fence; unwrap before the
// strict parse.
std::string strip_code_fence(const std::string& text) {
    auto first = text.find('{');
    auto last = text.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) return text;
    return text.substr(first, last - first + 1);
}

ParsedDecomposition parse_node(const std::string& question, const nlohmann::json& value) {
    ParsedDecomposition node;
    node.question = question;
    if (!value.is_array()) {
        throw MalformedDecomposition("sub-question list must be a JSON array");
    }
    for (const auto& item : value) {
        if (item.is_string()) {
            ParsedDecomposition leaf;
            leaf.question = item.get<std::string>();
            if (leaf.question.empty()) {
                throw MalformedDecomposition("empty sub-question");
            }
            node.children.push_back(std::move(leaf));
        } else if (item.is_object() && item.size() == 1) {
            auto sub = item.begin();
            node.children.push_back(parse_node(sub.key(), sub.value()));
        } else {
            throw MalformedDecomposition(
                "sub-question must be a string or a single-key object");
        }
    }
    return node;
}

int tree_depth_of(const ParsedDecomposition& p) {
    int best = 0;
    for (const auto& c : p.children) best = std::max(best, 1 + tree_depth_of(c));
    return best;
}

}  // namespace

ParsedDecomposition parse_decomposition(const std::string& llm_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(strip_code_fence(llm_text));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedDecomposition(std::string("response is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || j.size() != 1) {
        throw MalformedDecomposition("response must contain exactly one top-level question");
    }
    auto entry = j.begin();
    return parse_node(entry.key(), entry.value());
}

QueryTree build_tree(const std::string& root_question, const ParsedDecomposition& parsed,
                     const QuestionType& root_label, int max_depth) {
    if (tree_depth_of(parsed) > max_depth) throw DepthExceeded(max_depth);

    QueryTree tree;
    // Post-order id assignment: children before parents, siblings in order.
    std::function<int(const ParsedDecomposition&, const std::string&)> emit =
        [&](const ParsedDecomposition& p, const std::string& text) -> int {
        std::vector<int> sons;
        sons.reserve(p.children.size());
        for (const auto& child : p.children) {
            sons.push_back(emit(child, child.question));
        }
        DecompositionNode node;
        node.idx = static_cast<int>(tree.nodes.size());
        node.question_text = text;
        node.sons = std::move(sons);
        node.qlabel = classify_question(text);
        for (int s : node.sons) tree.nodes[static_cast<std::size_t>(s)].fa = node.idx;
        tree.nodes.push_back(std::move(node));
        return tree.nodes.back().idx;
    };
    tree.root_idx = emit(parsed, root_question);
    tree.nodes[static_cast<std::size_t>(tree.root_idx)].qlabel = root_label;
    tree.validate();
    return tree;
}

DecomposeOutcome decompose(const std::string& question, const QuestionType& qtype,
                           LlmGateway& gateway, const DecomposeOptions& options) {
    const PromptTemplate& tpl = get_template(decompose_template_id(qtype.category));
    const std::string standardized = standardize_time(question);

    LlmRequest request;
    request.model_id = options.model_id;
    request.temperature = options.temperature;
    request.user_content = render_prompt(tpl, question);

    DecomposeOutcome outcome;
    std::string response;
    ParsedDecomposition parsed;
    bool have_parse = false;

    for (int attempt = 0; attempt < 2 && !have_parse; ++attempt) {
        if (attempt == 1) {
            request.user_content = render_prompt(tpl, question) + "\nReturn valid JSON only.";
        }
        response = gateway.complete(request).text;
        ++outcome.llm_calls;
        try {
            parsed = parse_decomposition(response);
            have_parse = true;
        } catch (const MalformedDecomposition&) {
            if (attempt == 1 && !options.fallback_to_leaf) throw;
        }
    }

    if (!have_parse) {
        // Degrade to a leaf-only tree: the question is answered by direct IR.
        outcome.fallback_leaf_only = true;
        parsed = ParsedDecomposition{standardized, {}};
    }

    outcome.tree = build_tree(standardized, parsed, qtype, options.max_depth);
    return outcome;
}

}  // namespace chronoqa
