#include "chronoqa/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "chronoqa/errors.hpp"

namespace chronoqa {

const char* to_string(AnswerType t) {
    return t == AnswerType::Entity ? "entity" : "time";
}

std::optional<AnswerType> answer_type_from_string(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "entity") return AnswerType::Entity;
    if (l == "time" || l == "timestamp") return AnswerType::Time;
    return std::nullopt;
}

std::string normalize_answer_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (c == '[' || c == ']') continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

namespace {

bool timestamps_match(const TimeStamp& a, const TimeStamp& b) {
    Granularity coarser = std::min(a.granularity(), b.granularity());
    return a.truncated(coarser).render() == b.truncated(coarser).render();
}

bool value_matches_gold(const std::string& value, const std::string& gold) {
    if (is_iso_prefix(value) && is_iso_prefix(gold)) {
        return timestamps_match(parse_timestamp(value), parse_timestamp(gold));
    }
    return normalize_answer_text(value) == normalize_answer_text(gold);
}

}  // namespace

bool match_answer(const Answer& prediction, const std::vector<std::string>& gold) {
    if (prediction.kind == AnswerKind::Unknown || prediction.kind == AnswerKind::Error) {
        return false;
    }
    for (const std::string& g : gold) {
        switch (prediction.kind) {
            case AnswerKind::EntityTimeList:
                for (const auto& pair : prediction.pairs) {
                    if (value_matches_gold(pair.entity, g)) return true;
                }
                break;
            case AnswerKind::Timestamp:
            case AnswerKind::Entity:
                if (value_matches_gold(prediction.value, g)) return true;
                break;
            default:
                break;
        }
    }
    return false;
}

void score_record(EvalRecord& record) {
    record.hit1 = false;
    record.hit10 = false;
    for (std::size_t i = 0; i < record.predictions.size() && i < 10; ++i) {
        if (match_answer(record.predictions[i], record.gold)) {
            if (i == 0) record.hit1 = true;
            record.hit10 = true;
            break;
        }
    }
}

double hits_at_k(const std::vector<EvalRecord>& records, int k) {
    if (records.empty()) throw EmptyRecordSet("hits@k");
    std::size_t hits = 0;
    for (const auto& r : records) {
        std::size_t limit = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                  r.predictions.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (match_answer(r.predictions[i], r.gold)) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double recall_at_n(const std::vector<RetrievalResult>& retrieved,
                   const std::set<std::int64_t>& gold_fact_ids) {
    if (gold_fact_ids.empty()) throw UndefinedRecall();
    std::size_t found = 0;
    for (const auto& r : retrieved) {
        if (gold_fact_ids.count(r.fact_id)) ++found;
    }
    return static_cast<double>(found) / static_cast<double>(gold_fact_ids.size());
}

std::vector<RecallCurvePoint> recall_curve(
    const std::vector<std::vector<RetrievalResult>>& retrieved_per_question,
    const std::vector<std::set<std::int64_t>>& gold_per_question, const std::vector<int>& ns) {
    if (retrieved_per_question.size() != gold_per_question.size()) {
        throw Error("retrieved/gold size mismatch");
    }
    std::vector<RecallCurvePoint> curve;
    for (int n : ns) {
        RecallCurvePoint point;
        point.n = n;
        double total = 0.0;
        for (std::size_t q = 0; q < retrieved_per_question.size(); ++q) {
            if (gold_per_question[q].empty()) {
                ++point.excluded;
                continue;
            }
            const auto& full = retrieved_per_question[q];
            std::vector<RetrievalResult> head(
                full.begin(),
                full.begin() + std::min<std::size_t>(static_cast<std::size_t>(n), full.size()));
            total += recall_at_n(head, gold_per_question[q]);
            ++point.questions;
        }
        point.mean_recall = point.questions ? total / static_cast<double>(point.questions) : 0.0;
        curve.push_back(point);
    }
    return curve;
}

TreeStats tree_stats(const std::vector<TreeStatsInput>& trees) {
    if (trees.empty()) throw EmptyRecordSet("tree statistics");
    TreeStats stats;
    for (const auto& t : trees) {
        stats.avg_depth += t.depth;
        stats.avg_branch += t.branch;
        stats.avg_api_calls += t.api_calls;
    }
    auto n = static_cast<double>(trees.size());
    stats.avg_depth /= n;
    stats.avg_branch /= n;
    stats.avg_api_calls /= n;
    return stats;
}

namespace {

void accumulate(MetricPair& m, const EvalRecord& r) {
    m.hits1 += r.hit1 ? 1.0 : 0.0;
    m.hits10 += r.hit10 ? 1.0 : 0.0;
    ++m.count;
}

void finalize(MetricPair& m) {
    if (m.count == 0) return;
    m.hits1 /= static_cast<double>(m.count);
    m.hits10 /= static_cast<double>(m.count);
}

}  // namespace

EvalSummary summarize_records(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw EmptyRecordSet("evaluation summary");
    EvalSummary s;
    std::vector<TreeStatsInput> trees;
    for (const auto& r : records) {
        accumulate(s.overall, r);
        accumulate(s.by_complexity[to_string(r.qtype.complexity)], r);
        accumulate(s.by_answer_type[to_string(r.answer_type)], r);
        accumulate(s.by_category[to_string(r.qtype.category)], r);
        if (r.time_granularity) {
            accumulate(
                s.by_category_granularity[to_string(r.qtype.category)]
                                         [to_string(*r.time_granularity)],
                r);
        }
        trees.push_back(TreeStatsInput{r.tree_depth, r.tree_branch, r.api_calls});
    }
    finalize(s.overall);
    for (auto& [k, m] : s.by_complexity) finalize(m);
    for (auto& [k, m] : s.by_answer_type) finalize(m);
    for (auto& [k, m] : s.by_category) finalize(m);
    for (auto& [k, per_gran] : s.by_category_granularity) {
        for (auto& [g, m] : per_gran) finalize(m);
    }
    s.trees = tree_stats(trees);
    return s;
}

nlohmann::json summary_to_json(const EvalSummary& s) {
    auto pair_json = [](const MetricPair& m) {
        return nlohmann::json{{"hits1", m.hits1}, {"hits10", m.hits10}, {"count", m.count}};
    };
    nlohmann::json j;
    j["overall"] = pair_json(s.overall);
    for (const auto& [k, m] : s.by_complexity) j["by_question_type"][k] = pair_json(m);
    for (const auto& [k, m] : s.by_answer_type) j["by_answer_type"][k] = pair_json(m);
    for (const auto& [k, m] : s.by_category) j["by_category"][k] = pair_json(m);
    for (const auto& [k, per_gran] : s.by_category_granularity) {
        for (const auto& [g, m] : per_gran) j["by_category_granularity"][k][g] = pair_json(m);
    }
    j["trees"] = nlohmann::json{{"avg_depth", s.trees.avg_depth},
                                {"avg_branch", s.trees.avg_branch},
                                {"avg_api_calls", s.trees.avg_api_calls}};
    return j;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void render_metric_block(std::ostringstream& out, const std::string& title,
                         const std::map<std::string, MetricPair>& rows) {
    out << title << "\n";
    std::size_t width = 8;
    for (const auto& [k, m] : rows) width = std::max(width, k.size());
    for (const auto& [k, m] : rows) {
        out << "  " << k << std::string(width - k.size() + 2, ' ') << fmt3(m.hits1) << "  "
            << fmt3(m.hits10) << "  " << m.count << "\n";
    }
}

}  // namespace

std::string render_summary_tables(const EvalSummary& s) {
    std::ostringstream out;
    out << "== Accuracy (Hits@1 / Hits@10 / n) ==\n";
    out << "  Overall" << std::string(3, ' ') << fmt3(s.overall.hits1) << "  "
        << fmt3(s.overall.hits10) << "  " << s.overall.count << "\n";
    render_metric_block(out, "Question Type", s.by_complexity);
    render_metric_block(out, "Answer Type", s.by_answer_type);
    render_metric_block(out, "Category", s.by_category);

    if (!s.by_category_granularity.empty()) {
        out << "== Hits@1 by category and granularity ==\n";
        out << "  " << std::string(16, ' ') << "Day     Month   Year\n";
        for (const auto& [category, per_gran] : s.by_category_granularity) {
            out << "  " << category << std::string(category.size() < 16 ? 16 - category.size() : 1, ' ');
            for (const char* g : {"day", "month", "year"}) {
                auto it = per_gran.find(g);
                out << (it == per_gran.end() ? "  -   " : fmt3(it->second.hits1)) << "  ";
            }
            out << "\n";
        }
    }

    out << "== Tree statistics ==\n";
    out << "  Avg Depth     " << fmt2(s.trees.avg_depth) << "\n";
    out << "  Avg Branch    " << fmt2(s.trees.avg_branch) << "\n";
    out << "  Avg API Call  " << fmt2(s.trees.avg_api_calls) << "\n";
    return out.str();
}

std::string render_recall_table(const std::vector<RecallCurvePoint>& curve,
                                const std::map<int, double>* hits1_by_n) {
    std::ostringstream out;
    out << "Context Length";
    if (hits1_by_n) out << "  Hits@1";
    out << "  Recall@n  (questions, excluded)\n";
    for (const auto& point : curve) {
        out << "  n=" << point.n << std::string(point.n < 100 ? 12 - 4 : 8, ' ');
        if (hits1_by_n) {
            auto it = hits1_by_n->find(point.n);
            out << (it == hits1_by_n->end() ? "   -  " : fmt2(it->second * 100.0) + "%") << "  ";
        }
        out << fmt2(point.mean_recall * 100.0) << "%     (" << point.questions << ", "
            << point.excluded << ")\n";
    }
    return out.str();
}

}  // namespace chronoqa
