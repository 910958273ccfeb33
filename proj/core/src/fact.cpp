#include "chronoqa/fact.hpp"

#include "chronoqa/errors.hpp"

namespace chronoqa {

std::string TemporalFact::dedup_key() const {
    std::string key;
    key.reserve(subject.size() + predicate.size() + object.size() + 24);
    key += subject;
    key += '\t';
    key += predicate;
    key += '\t';
    key += object;
    key += '\t';
    if (time) {
        key += time->render();
    } else if (start) {
        key += start->render();
        key += '\t';
        key += end->render();
    }
    return key;
}

void TemporalFact::check() const {
    if (subject.empty() || predicate.empty() || object.empty()) {
        throw Error("fact with empty subject/predicate/object");
    }
    const bool point = time.has_value();
    const bool interval = start.has_value() || end.has_value();
    if (point == interval) {
        throw Error("fact must carry exactly one of point time or interval");
    }
    if (interval) {
        if (!start || !end) throw Error("interval fact missing start or end");
        if (compare_timestamps(*start, *end) == TimeOrder::After) {
            throw Error("interval fact with start after end: " + start->render() + " > " +
                        end->render());
        }
    }
}

}  // namespace chronoqa
