#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chronoqa/fact.hpp"
#include "chronoqa/store.hpp"

namespace chronoqa {

// A fact rendered as a natural-language statement for embedding and for
// prompt context.
struct VerbalizedFact {
    std::int64_t fact_id = -1;
    std::string text;
};

// Optional per-predicate surface forms, e.g. "Make a visit" -> "made a visit
// to". Predicates without an entry render verbatim.
class SurfaceForms {
public:
    SurfaceForms() = default;
    explicit SurfaceForms(std::map<std::string, std::string> forms) : forms_(std::move(forms)) {}

    // Loads a JSON object {predicate: rendered phrase}.
    static SurfaceForms load(const std::string& path);

    const std::string* lookup(const std::string& predicate) const {
        auto it = forms_.find(predicate);
        return it == forms_.end() ? nullptr : &it->second;
    }
    std::size_t size() const { return forms_.size(); }

private:
    std::map<std::string, std::string> forms_;
};

// Point facts: "<subject> <predicate> <object> in <time>".
// Interval facts: "<subject> <predicate> <object> from <start> to <end>".
std::string verbalize_text(const TemporalFact& fact, const SurfaceForms* forms = nullptr);

VerbalizedFact verbalize(const TemporalFact& fact, const SurfaceForms* forms = nullptr);

// One statement per stored fact, ordered by fact_id.
std::vector<VerbalizedFact> verbalize_store(const TkgStore& store,
                                            const SurfaceForms* forms = nullptr);

}  // namespace chronoqa
