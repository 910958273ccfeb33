#include "chronoqa/prompts.hpp"

#include <map>

#include "chronoqa/errors.hpp"

namespace chronoqa {

namespace {

// The few-shot decompositions were hand-crafted against ICEWS-style
// validation questions. They are reproduced byte-for-byte, including the
// "2002-04-19" date slip in the fourth direct example, so that recorded live
// traffic stays replayable against the published prompt set.
std::vector<PromptTemplate> make_templates() {
    std::vector<PromptTemplate> tpls;

    {
        PromptTemplate t;
        t.template_id = kTplDecomposeDirect;
        t.style = PromptStyle::QuestionAnswer;
        t.instruction =
            "Convert the following question into a JSON object where the question is the key "
            "and the value is an empty list. Do not include any explanation or extra text. "
            "Just return the JSON.\n"
            "Just return the modified question in JSON format with an empty list as its value.";
        t.few_shot = {
            {"Who visited France in 2009-05?",
             R"({"Who visited France in 2009-05?": []})"},
            {"When did Qatar pay a visit to Barack Obama?",
             R"({"When did Qatar pay a visit to Barack Obama?": []})"},
            {"Who applied for Iran in January 2010?",
             R"({"Who applied for Iran in 2010-01?": []})"},
            {"Which country negotiated with Japan on 19 April 2005?",
             R"({"Which country negotiated with Japan on 2002-04-19?": []})"},
            {"Who visited Japan in April 2012?",
             R"({"Who visited Japan in 2012-04?": []})"},
            {"In May 2009, who signed an agreement with Iran?",
             R"({"In 2009-05, who signed an agreement with Iran?": []})"},
            {"Who accused Iran in 2015?",
             R"({"Who accused Iran in 2015?": []})"},
            {"On 19 March 2006, who threatened Iran?",
             R"({"On 2006-03-19, who threatened Iran?": []})"},
            {"Who visited Guatemala on 7 July 2007?",
             R"({"Who visited Guatemala on 2007-07-07?": []})"},
        };
        tpls.push_back(std::move(t));
    }

    {
        PromptTemplate t;
        t.template_id = kTplDecomposeConstraint;
        t.style = PromptStyle::QuestionAnswer;
        t.instruction =
            "You are an expert specializing in dealing with problems containing the keywords "
            "\"before/after\". You need to read the question carefully.\n"
            "1.If the problem involves a situation like \"before December 13, 2005\" with a "
            "\"before+ timestamp\", there is no need to decompose the original problem. Just "
            "convert the question into a JSON object where the question is the key and the "
            "value is an empty list.\n"
            "2.If the problem involves the situation of a \"before+ entity\" like \"before "
            "Japan\", the original problem needs to be decomposed into sub-problems. First, "
            "generate an explicit sub-question to determine the time (e.g., \"When did "
            "Iran…?\"). When a sub-question is logically depends on the answer to a previous "
            "one, use placeholders (e.g., #1) to refer to that answer. Return a valid JSON "
            "object representing the question tree. Each key is a parent question, and its "
            "value is a list of sub-questions.";
        t.few_shot = {
            {"Who rejected Iran before the citizens of State Actor did?",
             R"({"Who rejected Iran before the citizens of State Actor did?": ["When did the citizens of State Actor reject Iran?", "Who rejected Iran before #1?"]})"},
            {"After Japan, who made South Korea suffer from conventional military forces?",
             R"({"After Japan, who made South Korea suffer from conventional military forces?": ["When did Japan make South Korea suffer from conventional military forces?", "Who make South Korea suffer from conventional military forces after #1?"]})"},
            {"Which country did Qatar appeal to after April 2011?",
             R"({"Which country did Qatar appeal to after 2011-04?": []})"},
            {"Before 14 October 2015, who made Burundi suffer from conventional military forces?",
             R"({"Before 2015-10-14, who made Burundi suffer from conventional military forces?": []})"},
            {"Who had a telephone conversation with Japan after November 2005?",
             R"({"Who had a telephone conversation with Japan after 2005-11?": []})"},
            {"Who negotiated with Colombia before 22 December 2010?",
             R"({"Who negotiated with Colombia before 2010-12-22?": []})"},
            {"With which country did Qatar sign formal agreements before 15 January 2008?",
             R"({"With which country did Qatar sign formal agreements before 2008-01-15?": []})"},
            {"After November 2007, who wanted to engage in diplomatic cooperation with Timor-Leste?",
             R"({"After 2007-11, who wanted to engage in diplomatic cooperation with Timor-Leste?": []})"},
            {"Before 24 January 2005, who wanted to establish diplomatic cooperation with the Kuomintang?",
             R"({"Before 2005-01-24, who wanted to establish diplomatic cooperation with the Kuomintang?": []})"},
            {"Who negotiated with Bolivia after June 2007?",
             R"({"Who negotiated with Bolivia after 2007-06?": []})"},
        };
        tpls.push_back(std::move(t));
    }

    {
        PromptTemplate t;
        t.template_id = kTplReasonFacts;
        t.style = PromptStyle::HistoricalFacts;
        t.instruction =
            "Based on the historical facts, please answer the given question clearly in the "
            "following format: ...So the answer is: <final concise answer>.\n"
            "1.If the question asks for a specific year (e.g., \"Which year\", \"In which "
            "year\", \"the exact year\", etc.), then return the answer in \"yyyy\" format. "
            "Just return the most appropriate timestamp as the answer.\n"
            "2.If the question asks for a specific month (e.g., \"Which month\", \"In what "
            "month\", \"the exact month\", etc.), then return the answer in \"yyyy-mm\" "
            "format, including the year and the month. Just return the most appropriate "
            "timestamp as the answer.\n"
            "3.If the question asks for a specific date (e.g., contains keywords like "
            "\"When\", \"What day\", \"the exact date\", etc.), return the answer in "
            "\"yyyy-mm-dd\" format. Just return the most appropriate timestamp as the "
            "answer.\n"
            "4.If the question asks for a set of entities (e.g., contains keywords like "
            "\"who\", \"which country\", etc.), and multiple sources in the context offer "
            "valid answers, return the union of all correct, non-duplicate entities and "
            "attached timestamp in a list format.";
        t.few_shot = {
            {"Historical facts:\n"
             "Barack Obama Reject Party Member (United Kingdom) 2008-09-23.\n"
             "Barack Obama Reject Party Member (United Kingdom) 2008-09-23.\n"
             "Barack Obama Make statement Party Member (United Kingdom) 2008-11-08.\n"
             "Barack Obama Make statement Party Member (United Kingdom) 2008-11-08.\n"
             "Barack Obama Express intent to meet or negotiate Party Member (United Kingdom) "
             "2009-03-10.\n"
             "Zawahiri Reject Barack Obama 2009-08-04.\n"
             "Question: In which year did Barack Obama reject the party member of United "
             "Kingdom?",
             "The rejection event occurred on 2008-09-23, so the year is 2008. So the answer "
             "is: 2008."},
            {"Historical facts:\n"
             "Media Personnel (Somalia) Praise or endorse Cabinet / Council of Ministers / "
             "Advisors (Somalia) 2012-11-27.\n"
             "Media Personnel (Somalia) Praise or endorse Cabinet / Council of Ministers / "
             "Advisors (Somalia) 2015-01-12.\n"
             "Media Personnel (Somalia) Make statement African Union 2007-10-08.\n"
             "Media Personnel (Somalia) Make statement African Union 2007-01-17.\n"
             "Media Personnel (Somalia) Make statement African Union 2012-11-18.\n"
             "Cabinet / Council of Ministers / Advisors (Somalia) Praise or endorse Media "
             "Personnel (Somalia) 2011-11-28.\n"
             "Media Personnel (Somalia) Make statement African Union 2007-06-15.\n"
             "Question: When did Somalia's media personnel first commend Somalia's council of "
             "ministers?",
             "We are asked to find the first time Somalia's media personnel commended (i.e., "
             "praised or endorsed) Somalia's Cabinet / Council of Ministers / Advisors. From "
             "the historical facts: Media Personnel (Somalia) Praise or endorse Cabinet / "
             "Council of Ministers / Advisors (Somalia) on: 2012-11-27 and 2015-01-12. Among "
             "these, the earliest instance is 2012-11-27. So the answer is: 2012-11-27."},
            {"Historical facts:\n"
             "Agence France-Presse Demand China in 2010-05-26.\n"
             "Agence France-Presse Make an appeal or request China in 2007-01-08.\n"
             "China Appeal for military aid Agence France-Presse in 2008-03-26.\n"
             "France Make an appeal or request China in 2012-06-05.\n"
             "France Demand China in 2008-06-11.\n"
             "Question: Could you tell me the exact month when Agence France-Presse appealed "
             "to China?",
             "So the answer is: 2007-01"},
        };
        tpls.push_back(std::move(t));
    }

    {
        PromptTemplate t;
        t.template_id = kTplPickFirstLast;
        t.style = PromptStyle::RelevantFacts;
        t.instruction =
            "Based on the Relevant facts, please answer the given question clearly in the "
            "following format: ...So the answer is: <final concise answer>.\n"
            "Each question provides a series of relevant facts, including \"entity + "
            "timestamp\" pairs. You need to choose the earliest or latest entity as the "
            "answer based on the order in which the events occurred.";
        t.few_shot = {
            {"Relevant facts:\n"
             "[\"China 2006-01-20\", \"China 2006-10-30\", \"Vietnam 2008-04-30\"]\n"
             "Question: Which country was the last one among them?",
             "The last country among the relevant facts, based on the timestamps, is Vietnam. "
             "So the answer is: Vietnam 2008-04-30."},
        };
        tpls.push_back(std::move(t));
    }

    {
        PromptTemplate t;
        t.template_id = kTplAggregate;
        t.style = PromptStyle::Aggregation;
        t.instruction =
            "You are given a question and multiple candidate answers from sources A, B, and "
            "C.\n"
            "Follow these strict rules to choose the best answer: If only sources A and B are "
            "available, prefer B's answer unless it is \"Unknown\" or \"Error\", in which "
            "case choose A. If all three sources A, B, and C are available, prefer C's answer "
            "unless it is \"Unknown\" or \"Error\", then fall back to B, and if B is also "
            "invalid, fall back to A.";
        t.few_shot = {
            {"Question: When did the citizens of Africa express their intention to establish "
             "diplomatic cooperation with Vietnam?\n"
             "Candidate answer:\n"
             "source A: 2012-09-04\n"
             "source B: 2012-09-04\n"
             "Source C: Unknown",
             "So the answer is: 2012-09-04"},
            {"Question: Who was the first to praise Juan Carlos I after 2006-02-22?\n"
             "Candidate answer:\n"
             "source A: Jorge Briz Abularach\n"
             "source B: Unknown\n"
             "Source C: House of Representatives (Uruguay)",
             "So the answer is: House of Representatives (Uruguay)"},
            {"Question: Who rejected the Prime Minister of India after 2012-01-03?\n"
             "Candidate answer:\n"
             "source A: Sri Lanka\n"
             "source B: China",
             "So the answer is: China"},
        };
        tpls.push_back(std::move(t));
    }

    return tpls;
}

const std::map<std::string, PromptTemplate>& registry() {
    static const std::map<std::string, PromptTemplate> reg = [] {
        std::map<std::string, PromptTemplate> m;
        for (auto& t : make_templates()) m.emplace(t.template_id, std::move(t));
        return m;
    }();
    return reg;
}

}  // namespace

const PromptTemplate& get_template(const std::string& template_id) {
    const auto& reg = registry();
    auto it = reg.find(template_id);
    if (it == reg.end()) throw UnknownTemplate(template_id);
    return it->second;
}

std::vector<std::string> template_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, t] : registry()) ids.push_back(id);
    return ids;
}

std::string render_prompt(const PromptTemplate& tpl, const std::string& question) {
    std::string out = tpl.instruction;
    if (!tpl.few_shot.empty()) {
        out += "\n\nHere are a few examples:\n";
        for (const auto& [input, output] : tpl.few_shot) {
            out += "Q: " + input + "\nA: " + output + "\n";
        }
    } else {
        out += "\n";
    }
    out += "\nQ: " + question + "\nA:";
    return out;
}

std::string render_prompt(const PromptTemplate& tpl, const std::string& question,
                          const std::vector<std::string>& fact_lines) {
    const char* facts_label =
        tpl.style == PromptStyle::RelevantFacts ? "Relevant facts:" : "Historical facts:";

    std::string out = tpl.instruction;
    if (!tpl.few_shot.empty()) {
        out += "\n\nHere are a few examples:\n";
        for (const auto& [input, output] : tpl.few_shot) {
            out += input + "\nAnswer: " + output + "\n\n";
        }
    } else {
        out += "\n\n";
    }
    out += facts_label;
    out += "\n";
    for (const auto& line : fact_lines) {
        out += line;
        out += "\n";
    }
    out += "Question: " + question + "\nAnswer:";
    return out;
}

std::string render_aggregation_prompt(const PromptTemplate& tpl, const std::string& question,
                                      const std::vector<std::pair<std::string, std::string>>&
                                          sources) {
    std::string out = tpl.instruction;
    if (!tpl.few_shot.empty()) {
        out += "\n\nHere are a few examples:\n";
        for (const auto& [input, output] : tpl.few_shot) {
            out += input + "\nOutput: " + output + "\n\n";
        }
    } else {
        out += "\n\n";
    }
    out += "Question: " + question + "\nCandidate answer:\n";
    for (const auto& [label, value] : sources) {
        // The recorded prompt set capitalizes the label for source C only.
        out += (label == "C" ? "Source " : "source ") + label + ": " + value + "\n";
    }
    out += "Output:";
    return out;
}

}  // namespace chronoqa
