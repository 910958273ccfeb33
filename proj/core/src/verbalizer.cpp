#include "chronoqa/verbalizer.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"

namespace chronoqa {

SurfaceForms SurfaceForms::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open surface form map: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid surface form map " + path + ": " + e.what());
    }
    if (!j.is_object()) throw IoError("surface form map must be a JSON object: " + path);
    std::map<std::string, std::string> forms;
    for (auto& [predicate, phrase] : j.items()) {
        if (!phrase.is_string()) {
            throw IoError("surface form for \"" + predicate + "\" must be a string");
        }
        forms[predicate] = phrase.get<std::string>();
    }
    return SurfaceForms(std::move(forms));
}

std::string verbalize_text(const TemporalFact& fact, const SurfaceForms* forms) {
    const std::string* phrase = forms ? forms->lookup(fact.predicate) : nullptr;
    const std::string& predicate = phrase ? *phrase : fact.predicate;

    std::string text;
    text.reserve(fact.subject.size() + predicate.size() + fact.object.size() + 32);
    text += fact.subject;
    text += ' ';
    text += predicate;
    text += ' ';
    text += fact.object;
    if (fact.is_point()) {
        text += " in ";
        text += fact.time->render();
    } else {
        text += " from ";
        text += fact.start->render();
        text += " to ";
        text += fact.end->render();
    }
    return text;
}

VerbalizedFact verbalize(const TemporalFact& fact, const SurfaceForms* forms) {
    return VerbalizedFact{fact.fact_id, verbalize_text(fact, forms)};
}

std::vector<VerbalizedFact> verbalize_store(const TkgStore& store, const SurfaceForms* forms) {
    std::vector<VerbalizedFact> out;
    out.reserve(store.size());
    for (const auto& fact : store.facts()) {
        out.push_back(verbalize(fact, forms));
    }
    return out;
}

}  // namespace chronoqa
