#include "chronoqa/answer.hpp"

#include <algorithm>
#include <cctype>

namespace chronoqa {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Splits "Stephen W. Bosworth 2009-05-08" into entity + ISO tail, when the
// last whitespace-separated token parses as a timestamp.
std::optional<EntityTime> split_entity_time(const std::string& text) {
    auto pos = text.find_last_of(" \t");
    if (pos == std::string::npos) return std::nullopt;
    std::string tail = trim(text.substr(pos + 1));
    std::string head = trim(text.substr(0, pos));
    if (head.empty() || !is_iso_prefix(tail)) return std::nullopt;
    return EntityTime{head, parse_timestamp(tail)};
}

}  // namespace

const char* to_string(AnswerKind k) {
    switch (k) {
        case AnswerKind::Entity: return "entity";
        case AnswerKind::Timestamp: return "timestamp";
        case AnswerKind::EntityTimeList: return "entity_time_list";
        case AnswerKind::Unknown: return "Unknown";
        case AnswerKind::Error: return "Error";
    }
    return "Unknown";
}

const char* to_string(AnswerSource s) {
    switch (s) {
        case AnswerSource::IR: return "IR";
        case AnswerSource::Child: return "child";
        case AnswerSource::Aggregated: return "aggregated";
    }
    return "IR";
}

bool Answer::is_valid() const {
    if (kind == AnswerKind::Unknown || kind == AnswerKind::Error) return false;
    if (kind == AnswerKind::EntityTimeList) return !pairs.empty();
    std::string v = lower(trim(value));
    return !v.empty() && v != "unknown" && v != "error";
}

std::string Answer::render_value() const {
    switch (kind) {
        case AnswerKind::Entity:
        case AnswerKind::Timestamp:
            return value;
        case AnswerKind::EntityTimeList: {
            std::string out;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                if (i) out += ", ";
                out += "[" + pairs[i].entity + " " + pairs[i].time.render() + "]";
            }
            return out;
        }
        case AnswerKind::Unknown: return "Unknown";
        case AnswerKind::Error: return "Error";
    }
    return "Unknown";
}

Answer Answer::entity(std::string value, AnswerSource source) {
    Answer a;
    a.kind = AnswerKind::Entity;
    a.value = std::move(value);
    a.source = source;
    return a;
}

Answer Answer::timestamp(const TimeStamp& t, AnswerSource source) {
    Answer a;
    a.kind = AnswerKind::Timestamp;
    a.value = t.render();
    a.source = source;
    return a;
}

Answer Answer::entity_time_list(std::vector<EntityTime> pairs, AnswerSource source) {
    Answer a;
    a.kind = AnswerKind::EntityTimeList;
    a.pairs = std::move(pairs);
    a.source = source;
    return a;
}

Answer Answer::unknown(std::string chain, AnswerSource source) {
    Answer a;
    a.kind = AnswerKind::Unknown;
    a.chain = std::move(chain);
    a.source = source;
    return a;
}

Answer Answer::error(std::string chain, AnswerSource source) {
    Answer a;
    a.kind = AnswerKind::Error;
    a.chain = std::move(chain);
    a.source = source;
    return a;
}

std::optional<std::string> extract_final_answer(const std::string& response) {
    static const std::string anchor = "so the answer is:";
    std::string haystack = lower(response);
    auto pos = haystack.rfind(anchor);
    if (pos == std::string::npos) return std::nullopt;
    std::string tail = trim(std::string_view(response).substr(pos + anchor.size()));
    while (!tail.empty() && (tail.back() == '.' || tail.back() == ' ')) tail.pop_back();
    return tail;
}

Answer parse_answer_text(const std::string& raw, AnswerSource source) {
    std::string text = trim(raw);
    if (text.empty()) return Answer::unknown(raw, source);

    std::string low = lower(text);
    if (low == "unknown" || low == "none") return Answer::unknown(raw, source);
    if (low == "error") return Answer::error(raw, source);

    if (is_iso_prefix(text)) {
        return Answer::timestamp(parse_timestamp(text), source);
    }
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
        std::string inner = trim(std::string_view(text).substr(1, text.size() - 2));
        if (is_iso_prefix(inner)) return Answer::timestamp(parse_timestamp(inner), source);
    }

    // Bracketed pair list: "[Wen Jiabao 2009-05-08], [France 2009-05-07]".
    if (text.find('[') != std::string::npos) {
        std::vector<EntityTime> pairs;
        bool well_formed = true;
        std::size_t pos = 0;
        while (true) {
            auto open = text.find('[', pos);
            if (open == std::string::npos) break;
            auto close = text.find(']', open + 1);
            if (close == std::string::npos) {
                well_formed = false;
                break;
            }
            std::string inner = trim(text.substr(open + 1, close - open - 1));
            if (auto pair = split_entity_time(inner)) {
                pairs.push_back(std::move(*pair));
            } else if (is_iso_prefix(inner)) {
                // A bare bracketed timestamp is still a timestamp answer.
                pairs.clear();
                well_formed = false;
                break;
            } else {
                well_formed = false;
                break;
            }
            pos = close + 1;
        }
        if (well_formed && !pairs.empty()) {
            return Answer::entity_time_list(std::move(pairs), source);
        }
    }

    // Unbracketed single pair: "Vietnam 2008-04-30".
    if (auto pair = split_entity_time(text)) {
        return Answer::entity_time_list({std::move(*pair)}, source);
    }

    return Answer::entity(std::move(text), source);
}

}  // namespace chronoqa
