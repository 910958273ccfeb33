#include "chronoqa/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <regex>

#include "chronoqa/errors.hpp"
#include "chronoqa/prompts.hpp"

namespace chronoqa {

namespace {

const char* kMonthNames[] = {"january", "february", "march",     "april",   "may",
                             "june",    "july",     "august",    "september", "october",
                             "november", "december"};
const char* kMonthAbbrev[] = {"jan", "feb", "mar", "apr", "may", "jun",
                              "jul", "aug", "sep", "oct", "nov", "dec"};

int month_number(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (int i = 0; i < 12; ++i) {
        if (name == kMonthNames[i] || name == kMonthAbbrev[i]) return i + 1;
    }
    return 0;
}

std::string month_alternation() {
    std::string alt;
    for (int i = 0; i < 12; ++i) {
        if (i) alt += '|';
        alt += kMonthNames[i];
        alt += '|';
        alt += kMonthAbbrev[i];
    }
    return alt;
}

// Three phrase shapes, tried in this order at each position:
//   "7 July 2007"      -> 2007-07-07
//   "July 7, 2007"     -> 2007-07-07
//   "July 2007"        -> 2007-07
const std::regex& time_phrase_re() {
    static const std::regex re(
        "\\b(?:"
        "(\\d{1,2})(?:st|nd|rd|th)?\\s+(" + month_alternation() + ")\\s+(\\d{4})"
        "|(" + month_alternation() + ")\\s+(\\d{1,2})(?:st|nd|rd|th)?,?\\s+(\\d{4})"
        "|(" + month_alternation() + ")\\s+(\\d{4})"
        ")\\b",
        std::regex::icase);
    return re;
}

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

const std::regex& placeholder_re() {
    static const std::regex re("#(\\d+)");
    return re;
}

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

}  // namespace

std::string standardize_time(const std::string& question) {
    std::string out;
    out.reserve(question.size());
    auto begin = std::sregex_iterator(question.begin(), question.end(), time_phrase_re());
    std::size_t consumed = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        int day = 0, month = 0, year = 0;
        if (m[1].matched) {  // D Month YYYY
            day = std::stoi(m[1].str());
            month = month_number(m[2].str());
            year = std::stoi(m[3].str());
        } else if (m[4].matched) {  // Month D, YYYY
            month = month_number(m[4].str());
            day = std::stoi(m[5].str());
            year = std::stoi(m[6].str());
        } else {  // Month YYYY
            month = month_number(m[7].str());
            year = std::stoi(m[8].str());
        }
        std::string replacement;
        if (month >= 1 && month <= 12 && (day == 0 || (day >= 1 && day <= 31))) {
            replacement = std::to_string(year) + "-" + two_digits(month);
            if (day > 0) replacement += "-" + two_digits(day);
        } else {
            replacement = m.str();  // unsupported values pass through
        }
        out += question.substr(consumed, static_cast<std::size_t>(m.position()) - consumed);
        out += replacement;
        consumed = static_cast<std::size_t>(m.position() + m.length());
    }
    out += question.substr(consumed);
    return out;
}

std::string replace_placeholders(const std::string& question,
                                 const std::map<int, Answer>& prior_answers) {
    std::string out;
    out.reserve(question.size());
    auto begin = std::sregex_iterator(question.begin(), question.end(), placeholder_re());
    std::size_t consumed = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        int j = std::stoi(m[1].str());
        auto found = prior_answers.find(j);
        if (found == prior_answers.end()) throw MissingPlaceholderAnswer(j);
        out += question.substr(consumed, static_cast<std::size_t>(m.position()) - consumed);
        out += found->second.render_value();
        consumed = static_cast<std::size_t>(m.position() + m.length());
    }
    out += question.substr(consumed);
    return out;
}

bool is_adjudication_question(const std::string& question) {
    std::string q = lower(question);
    bool pick = contains_word(q, "first") || contains_word(q, "last") ||
                contains_word(q, "earliest") || contains_word(q, "latest");
    bool over_candidates = contains_word(q, "among") || contains_word(q, "them");
    return pick && over_candidates;
}

Answer reason(const std::string& question, const std::vector<std::string>& fact_lines,
              const std::string& template_id, LlmGateway& gateway,
              const std::string& model_id, double temperature) {
    const PromptTemplate& tpl = get_template(template_id);

    LlmRequest request;
    request.model_id = model_id;
    request.temperature = temperature;
    request.user_content = render_prompt(tpl, question, fact_lines);

    LlmResponse response;
    try {
        response = gateway.complete(request);
    } catch (const Error& e) {
        return Answer::error(e.what());
    }

    auto text = extract_final_answer(response.text);
    if (!text) {
        Answer a = Answer::unknown(response.text);
        return a;
    }
    Answer a = parse_answer_text(*text, AnswerSource::IR);
    a.chain = response.text;
    return a;
}

Answer summarize(const std::string& question, const std::vector<Answer>& child_answers,
                 LlmGateway& gateway, const SolveConfig& config, int* llm_calls) {
    if (child_answers.empty()) throw Error("summarize requires at least one child answer");

    const Answer& last = child_answers.back();
    if (last.is_valid()) {
        Answer a = last;
        a.source = AnswerSource::Child;
        return a;
    }

    std::vector<std::string> candidate_lines;
    for (const auto& child : child_answers) {
        if (child.is_valid()) candidate_lines.push_back(child.render_value());
    }
    if (candidate_lines.empty()) {
        Answer a = Answer::unknown("summarize: all child answers invalid");
        a.source = AnswerSource::Child;
        return a;
    }

    if (llm_calls) ++*llm_calls;
    Answer a = reason(question, candidate_lines, kTplPickFirstLast, gateway,
                      config.reason_model, config.temperature);
    a.source = AnswerSource::Child;
    if (a.kind == AnswerKind::Error) {
        a = Answer::unknown(a.chain, AnswerSource::Child);
    }
    return a;
}

// ---------------------------------------------------------------------------
// Solver

Solver::Solver(const TkgStore& store, const std::vector<VerbalizedFact>& corpus,
               const VectorIndex& index, const Embedder& embedder, LlmGateway& gateway,
               SolveConfig config)
    : store_(store),
      corpus_(corpus),
      index_(index),
      embedder_(embedder),
      gateway_(gateway),
      config_(std::move(config)) {}

Answer Solver::reason_by_retrieval(const std::string& question, SolveTrace& trace) {
    std::vector<RetrievalResult> results = retrieve(question, index_, embedder_, config_.top_k);
    trace.retrieved_fact_ids.clear();
    trace.fact_lines.clear();
    for (const auto& r : results) {
        trace.retrieved_fact_ids.push_back(r.fact_id);
        // fact_id is the corpus position; verbalize_store keeps that order.
        trace.fact_lines.push_back(corpus_.at(static_cast<std::size_t>(r.fact_id)).text + ".");
    }
    ++trace.llm_calls;
    return reason(question, trace.fact_lines, kTplReasonFacts, gateway_, config_.reason_model,
                  config_.temperature);
}

void Solver::maybe_flag_violations(const std::string& question, SolveTrace& trace) const {
    if (!config_.flag_temporal_violations) return;
    static const std::regex constraint_re("\\b(before|after)\\s+(\\d{4}(?:-\\d{2}(?:-\\d{2})?)?)",
                                          std::regex::icase);
    std::smatch m;
    if (!std::regex_search(question, m, constraint_re)) return;
    bool want_before = lower(m[1].str()) == "before";
    TimeStamp bound = parse_timestamp(m[2].str());
    for (const auto& pair : trace.final_answer.pairs) {
        TimeOrder order = compare_timestamps(pair.time, bound);
        bool violates = want_before ? order == TimeOrder::After : order == TimeOrder::Before;
        if (violates) {
            trace.warnings.push_back("answer [" + pair.entity + " " + pair.time.render() +
                                     "] violates the \"" + m[1].str() + " " + m[2].str() +
                                     "\" constraint");
        }
    }
}

SolveTrace& Solver::solve_node(const QueryTree& tree, int idx, const std::string& substituted,
                               const std::map<int, Answer>& sibling_answers, int depth,
                               SolveResult& result) {
    if (depth > config_.max_depth) throw DepthExceeded(config_.max_depth);

    const DecompositionNode& node = tree.node(idx);
    SolveTrace trace;
    trace.node_idx = idx;
    trace.question = standardize_time(substituted);

    if (node.is_leaf()) {
        // Adjudication leaves ("Who was the last one among them?") rank the
        // nearest prior sibling's candidate list instead of retrieving.
        const Answer* candidate_list = nullptr;
        if (is_adjudication_question(trace.question)) {
            for (auto it = sibling_answers.rbegin(); it != sibling_answers.rend(); ++it) {
                if (it->second.kind == AnswerKind::EntityTimeList && it->second.is_valid()) {
                    candidate_list = &it->second;
                    break;
                }
            }
        }
        if (candidate_list) {
            for (const auto& pair : candidate_list->pairs) {
                trace.fact_lines.push_back("[" + pair.entity + " " + pair.time.render() + "]");
            }
            ++trace.llm_calls;
            Answer a = reason(trace.question, trace.fact_lines, kTplPickFirstLast, gateway_,
                              config_.reason_model, config_.temperature);
            trace.ir_answer = a;
            trace.final_answer = std::move(a);
        } else {
            Answer a = reason_by_retrieval(trace.question, trace);
            trace.ir_answer = a;
            trace.final_answer = std::move(a);
        }
    } else {
        // Children first, in sibling order, with progressive placeholder
        // substitution.
        std::map<int, Answer> answers_so_far;
        std::vector<Answer> child_answers;
        for (std::size_t i = 0; i < node.sons.size(); ++i) {
            const DecompositionNode& child = tree.node(node.sons[i]);
            Answer child_answer;
            try {
                std::string child_q = replace_placeholders(child.question_text, answers_so_far);
                SolveTrace& child_trace =
                    solve_node(tree, child.idx, child_q, answers_so_far, depth + 1, result);
                child_answer = child_trace.final_answer;
            } catch (const DepthExceeded&) {
                throw;
            } catch (const Error& e) {
                // A failed child becomes an Error answer; solving continues
                // and the parent may still recover through its own evidence.
                child_answer = Answer::error(e.what());
                SolveTrace failed;
                failed.node_idx = child.idx;
                failed.question = child.question_text;
                failed.final_answer = child_answer;
                failed.completion_seq = seq_++;
                result.traces[child.idx] = std::move(failed);
            }
            answers_so_far[static_cast<int>(i) + 1] = child_answer;
            child_answers.push_back(std::move(child_answer));
        }

        trace.child_answer = summarize(trace.question, child_answers, gateway_, config_,
                                       &trace.llm_calls);

        // The node's own evidence path over the global index.
        Answer ir = reason_by_retrieval(trace.question, trace);
        trace.ir_answer = ir;

        trace.final_answer =
            aggregate(CandidateSet::of(*trace.ir_answer, *trace.child_answer), trace.question,
                      &gateway_, config_.aggregation,
                      AggregateOptions{config_.aggregate_model, config_.temperature},
                      &trace.llm_calls);
    }

    maybe_flag_violations(trace.question, trace);
    trace.completion_seq = seq_++;
    result.llm_calls += trace.llm_calls;
    auto [it, inserted] = result.traces.insert_or_assign(idx, std::move(trace));
    return it->second;
}

SolveResult Solver::solve_tree(const QueryTree& tree) {
    tree.validate();
    SolveResult result;
    seq_ = 0;

    const DecompositionNode& root = tree.root();
    SolveTrace& root_trace = solve_node(tree, root.idx, root.question_text, {}, 0, result);
    result.final_answer = root_trace.final_answer;

    // Ranked predictions: final answer, then the remaining distinct
    // candidates, then distinct entities from the root's retrieved facts.
    auto push_unique = [&](const std::string& value) {
        if (value.empty()) return;
        std::string key = lower(value);
        for (const auto& existing : result.predictions) {
            if (lower(existing) == key) return;
        }
        result.predictions.push_back(value);
    };
    if (result.final_answer.is_valid()) push_unique(result.final_answer.render_value());
    if (root_trace.child_answer && root_trace.child_answer->is_valid()) {
        push_unique(root_trace.child_answer->render_value());
    }
    if (root_trace.ir_answer && root_trace.ir_answer->is_valid()) {
        push_unique(root_trace.ir_answer->render_value());
    }
    for (std::int64_t fact_id : root_trace.retrieved_fact_ids) {
        const TemporalFact& fact = store_.fact(fact_id);
        push_unique(fact.subject);
        push_unique(fact.object);
    }
    return result;
}

}  // namespace chronoqa
