#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "chronoqa/fact.hpp"

namespace chronoqa {

enum class TkgFormat { TsvQuadruple, TsvQuintuple, JsonLines };

const char* to_string(TkgFormat f);
TkgFormat tkg_format_from_string(const std::string& s);

struct LoadReport {
    std::size_t loaded = 0;      // facts kept
    std::size_t duplicates = 0;  // lines dropped as exact repeats
    std::size_t malformed = 0;   // lines skipped (lenient mode only)
};

// Immutable container for the temporal knowledge graph. fact_id equals the
// position in facts(), assigned in first-seen input order.
class TkgStore {
public:
    TkgStore() = default;

    // Loads a TKG file. In lenient mode malformed lines are skipped and
    // counted; otherwise the first bad line raises MalformedLine.
    static TkgStore load(const std::string& path, TkgFormat format, bool lenient = false,
                         LoadReport* report = nullptr);

    // Builds a store from in-memory facts (validating, deduplicating and
    // assigning ids).
    static TkgStore from_facts(std::vector<TemporalFact> facts, LoadReport* report = nullptr);

    const std::vector<TemporalFact>& facts() const { return facts_; }
    const TemporalFact& fact(std::int64_t fact_id) const;
    const std::set<std::string>& entities() const { return entities_; }
    const std::set<std::string>& predicates() const { return predicates_; }
    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }

private:
    std::vector<TemporalFact> facts_;
    std::set<std::string> entities_;
    std::set<std::string> predicates_;
};

}  // namespace chronoqa
