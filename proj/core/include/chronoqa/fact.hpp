#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "chronoqa/timestamp.hpp"

namespace chronoqa {

// One TKG fact: either a point quadruple (s, p, o, t) or an interval
// quintuple (s, p, o, start, end). Exactly one of the two time shapes is
// populated.
struct TemporalFact {
    std::int64_t fact_id = -1;
    std::string subject;
    std::string predicate;
    std::string object;
    std::optional<TimeStamp> time;   // point fact
    std::optional<TimeStamp> start;  // interval fact
    std::optional<TimeStamp> end;

    bool is_point() const { return time.has_value(); }
    bool is_interval() const { return start.has_value(); }

    static TemporalFact point(std::string s, std::string p, std::string o, TimeStamp t) {
        TemporalFact f;
        f.subject = std::move(s);
        f.predicate = std::move(p);
        f.object = std::move(o);
        f.time = t;
        return f;
    }

    static TemporalFact interval(std::string s, std::string p, std::string o, TimeStamp start,
                                 TimeStamp end) {
        TemporalFact f;
        f.subject = std::move(s);
        f.predicate = std::move(p);
        f.object = std::move(o);
        f.start = start;
        f.end = end;
        return f;
    }

    // Identity used for deduplication: every field except fact_id.
    std::string dedup_key() const;

    // Throws on a fact violating the shape invariants (both or neither time
    // representation set, interval with start after end, empty components).
    void check() const;
};

}  // namespace chronoqa
