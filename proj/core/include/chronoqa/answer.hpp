#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chronoqa/timestamp.hpp"

namespace chronoqa {

enum class AnswerKind { Entity, Timestamp, EntityTimeList, Unknown, Error };
enum class AnswerSource { IR, Child, Aggregated };

const char* to_string(AnswerKind k);
const char* to_string(AnswerSource s);

struct EntityTime {
    std::string entity;
    TimeStamp time;

    bool operator==(const EntityTime&) const = default;
};

// A tagged answer value with its provenance and reasoning chain.
struct Answer {
    AnswerKind kind = AnswerKind::Unknown;
    std::string value;               // Entity text, or canonical ISO timestamp
    std::vector<EntityTime> pairs;   // EntityTimeList payload
    AnswerSource source = AnswerSource::IR;
    std::string chain;               // full reasoning text (or error detail)

    // Not Unknown/Error, and not an LLM-emitted "unknown"/"error" literal.
    bool is_valid() const;

    // Canonical rendering: entity text, ISO timestamp, or
    // "[entity time], [entity time]" for lists. Unknown/Error render as their
    // kind name.
    std::string render_value() const;

    static Answer entity(std::string value, AnswerSource source = AnswerSource::IR);
    static Answer timestamp(const TimeStamp& t, AnswerSource source = AnswerSource::IR);
    static Answer entity_time_list(std::vector<EntityTime> pairs,
                                   AnswerSource source = AnswerSource::IR);
    static Answer unknown(std::string chain = "", AnswerSource source = AnswerSource::IR);
    static Answer error(std::string chain = "", AnswerSource source = AnswerSource::IR);
};

// Text after the final (case-insensitive) "So the answer is:" anchor, with
// surrounding whitespace and a trailing period removed. nullopt when the
// anchor is absent.
std::optional<std::string> extract_final_answer(const std::string& response);

// Shape inference for an extracted answer string:
//   ISO prefix                       -> Timestamp
//   "[e t], [e t]" or "e t" (t ISO)  -> EntityTimeList
//   "unknown" / "error" literals     -> Unknown / Error
//   anything else                    -> Entity
Answer parse_answer_text(const std::string& text, AnswerSource source = AnswerSource::IR);

}  // namespace chronoqa
