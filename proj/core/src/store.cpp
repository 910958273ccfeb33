#include "chronoqa/store.hpp"

#include <fstream>
#include <iostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"

namespace chronoqa {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(pos));
            break;
        }
        cols.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return cols;
}

TemporalFact fact_from_tsv(const std::vector<std::string>& cols, TkgFormat format,
                           std::size_t line_no) {
    const std::size_t expected = format == TkgFormat::TsvQuadruple ? 4 : 5;
    if (cols.size() != expected) {
        throw MalformedLine(line_no, "expected " + std::to_string(expected) + " columns, got " +
                                         std::to_string(cols.size()));
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (cols[i].empty()) throw MalformedLine(line_no, "empty column " + std::to_string(i + 1));
    }
    try {
        if (format == TkgFormat::TsvQuadruple) {
            return TemporalFact::point(cols[0], cols[1], cols[2], parse_timestamp(cols[3]));
        }
        return TemporalFact::interval(cols[0], cols[1], cols[2], parse_timestamp(cols[3]),
                                      parse_timestamp(cols[4]));
    } catch (const MalformedTimestamp& e) {
        throw MalformedLine(line_no, e.what());
    }
}

TemporalFact fact_from_json(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedLine(line_no, "expected a JSON object");
    try {
        std::string s = j.at("subject").get<std::string>();
        std::string p = j.at("predicate").get<std::string>();
        std::string o = j.at("object").get<std::string>();
        if (s.empty() || p.empty() || o.empty()) {
            throw MalformedLine(line_no, "empty subject/predicate/object");
        }
        if (j.contains("time")) {
            return TemporalFact::point(std::move(s), std::move(p), std::move(o),
                                       parse_timestamp(j.at("time").get<std::string>()));
        }
        return TemporalFact::interval(std::move(s), std::move(p), std::move(o),
                                      parse_timestamp(j.at("start").get<std::string>()),
                                      parse_timestamp(j.at("end").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(line_no, std::string("missing or mistyped key: ") + e.what());
    } catch (const MalformedTimestamp& e) {
        throw MalformedLine(line_no, e.what());
    }
}

}  // namespace

const char* to_string(TkgFormat f) {
    switch (f) {
        case TkgFormat::TsvQuadruple: return "tsv-quadruple";
        case TkgFormat::TsvQuintuple: return "tsv-quintuple";
        case TkgFormat::JsonLines: return "json-lines";
    }
    return "tsv-quadruple";
}

TkgFormat tkg_format_from_string(const std::string& s) {
    if (s == "tsv-quadruple" || s == "tsv" || s == "tsv4") return TkgFormat::TsvQuadruple;
    if (s == "tsv-quintuple" || s == "tsv5") return TkgFormat::TsvQuintuple;
    if (s == "json-lines" || s == "jsonl") return TkgFormat::JsonLines;
    throw ConfigError("unknown TKG format: " + s);
}

TkgStore TkgStore::load(const std::string& path, TkgFormat format, bool lenient,
                        LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open TKG file: " + path);

    LoadReport local;
    std::vector<TemporalFact> facts;
    std::unordered_set<std::string> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        TemporalFact fact;
        try {
            fact = format == TkgFormat::JsonLines
                       ? fact_from_json(line, line_no)
                       : fact_from_tsv(split_tabs(line), format, line_no);
            fact.check();
        } catch (const Error& e) {
            if (!lenient) throw;
            std::cerr << "warning: " << path << ":" << line_no << " skipped (" << e.what()
                      << ")\n";
            ++local.malformed;
            continue;
        }
        if (!seen.insert(fact.dedup_key()).second) {
            ++local.duplicates;
            continue;
        }
        fact.fact_id = static_cast<std::int64_t>(facts.size());
        facts.push_back(std::move(fact));
    }
    local.loaded = facts.size();
    if (report) *report = local;

    TkgStore store;
    store.facts_ = std::move(facts);
    for (const auto& f : store.facts_) {
        store.entities_.insert(f.subject);
        store.entities_.insert(f.object);
        store.predicates_.insert(f.predicate);
    }
    return store;
}

TkgStore TkgStore::from_facts(std::vector<TemporalFact> input, LoadReport* report) {
    LoadReport local;
    std::vector<TemporalFact> facts;
    std::unordered_set<std::string> seen;
    for (auto& fact : input) {
        fact.check();
        if (!seen.insert(fact.dedup_key()).second) {
            ++local.duplicates;
            continue;
        }
        fact.fact_id = static_cast<std::int64_t>(facts.size());
        facts.push_back(std::move(fact));
    }
    local.loaded = facts.size();
    if (report) *report = local;

    TkgStore store;
    store.facts_ = std::move(facts);
    for (const auto& f : store.facts_) {
        store.entities_.insert(f.subject);
        store.entities_.insert(f.object);
        store.predicates_.insert(f.predicate);
    }
    return store;
}

const TemporalFact& TkgStore::fact(std::int64_t fact_id) const {
    if (fact_id < 0 || static_cast<std::size_t>(fact_id) >= facts_.size()) {
        throw Error("unknown fact_id: " + std::to_string(fact_id));
    }
    return facts_[static_cast<std::size_t>(fact_id)];
}

}  // namespace chronoqa
