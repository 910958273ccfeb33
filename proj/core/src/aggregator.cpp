#include "chronoqa/aggregator.hpp"

#include "chronoqa/errors.hpp"
#include "chronoqa/prompts.hpp"

namespace chronoqa {

const char* to_string(AggregationMode m) {
    return m == AggregationMode::Rules ? "rules" : "llm_assisted";
}

AggregationMode aggregation_mode_from_string(const std::string& s) {
    if (s == "rules") return AggregationMode::Rules;
    if (s == "llm_assisted" || s == "llm-assisted" || s == "llm") {
        return AggregationMode::LlmAssisted;
    }
    throw ConfigError("unknown aggregation mode: " + s);
}

const char* to_string(SourceLabel l) {
    switch (l) {
        case SourceLabel::A: return "A";
        case SourceLabel::B: return "B";
        case SourceLabel::C: return "C";
    }
    return "A";
}

CandidateSet CandidateSet::of(Answer a, Answer b) {
    CandidateSet set;
    set.sources.push_back({SourceLabel::A, std::move(a)});
    set.sources.push_back({SourceLabel::B, std::move(b)});
    return set;
}

CandidateSet CandidateSet::of(Answer a, Answer b, Answer c) {
    CandidateSet set = of(std::move(a), std::move(b));
    set.sources.push_back({SourceLabel::C, std::move(c)});
    return set;
}

void CandidateSet::validate() const {
    if (sources.size() != 2 && sources.size() != 3) {
        throw Error("candidate set must contain 2 or 3 sources");
    }
    static constexpr SourceLabel expected[] = {SourceLabel::A, SourceLabel::B, SourceLabel::C};
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (sources[i].label != expected[i]) {
            throw Error("candidate labels must be A, B[, C] in order");
        }
    }
}

namespace {

Answer by_rules(const CandidateSet& candidates) {
    // Highest-priority valid source wins: C, then B, then A.
    for (auto it = candidates.sources.rbegin(); it != candidates.sources.rend(); ++it) {
        if (it->answer.is_valid()) {
            Answer chosen = it->answer;
            chosen.source = AnswerSource::Aggregated;
            chosen.chain = std::string("aggregated: source ") + to_string(it->label);
            return chosen;
        }
    }
    Answer none = Answer::unknown("aggregated: no valid candidate");
    none.source = AnswerSource::Aggregated;
    return none;
}

}  // namespace

Answer aggregate(const CandidateSet& candidates, const std::string& question,
                 LlmGateway* gateway, AggregationMode mode, const AggregateOptions& options,
                 int* llm_calls) {
    candidates.validate();
    if (mode == AggregationMode::Rules || gateway == nullptr) {
        return by_rules(candidates);
    }

    std::vector<std::pair<std::string, std::string>> lines;
    lines.reserve(candidates.sources.size());
    for (const auto& c : candidates.sources) {
        lines.emplace_back(to_string(c.label), c.answer.render_value());
    }

    try {
        LlmRequest request;
        request.model_id = options.model_id;
        request.temperature = options.temperature;
        request.user_content =
            render_aggregation_prompt(get_template(kTplAggregate), question, lines);
        if (llm_calls) ++*llm_calls;  // counted even when the call fails
        LlmResponse response = gateway->complete(request);
        if (auto text = extract_final_answer(response.text)) {
            Answer parsed = parse_answer_text(*text, AnswerSource::Aggregated);
            if (parsed.kind != AnswerKind::Unknown && parsed.kind != AnswerKind::Error) {
                parsed.chain = response.text;
                return parsed;
            }
        }
    } catch (const Error&) {
        // fall through to the deterministic rules
    }
    return by_rules(candidates);
}

}  // namespace chronoqa
