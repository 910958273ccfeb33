#include <regex>

#include <doctest.h>

#include "chronoqa/verbalizer.hpp"

#include "support/paths.hpp"
#include "support/synthetic.hpp"

using namespace chronoqa;

TEST_SUITE("verbalizer") {

TEST_CASE("point facts use the in-time template") {
    TemporalFact f = TemporalFact::point("Georgios Papandreou", "Make a visit", "China",
                                         TimeStamp::of_day(2009, 5, 12));
    CHECK(verbalize_text(f) == "Georgios Papandreou Make a visit China in 2009-05-12");
}

TEST_CASE("interval facts use the from-to template") {
    TemporalFact f = TemporalFact::interval("A", "r", "B", TimeStamp::of_year(2001),
                                            TimeStamp::of_year(2003));
    CHECK(verbalize_text(f) == "A r B from 2001 to 2003");
}

TEST_CASE("surface forms replace the predicate only") {
    SurfaceForms forms(std::map<std::string, std::string>{{"Make a visit", "made a visit to"}});
    TemporalFact f = TemporalFact::point("Wen Jiabao", "Make a visit", "China",
                                         TimeStamp::of_day(2009, 5, 8));
    CHECK(verbalize_text(f, &forms) == "Wen Jiabao made a visit to China in 2009-05-08");
    TemporalFact other = TemporalFact::point("Wen Jiabao", "Reject", "China",
                                             TimeStamp::of_day(2009, 5, 8));
    CHECK(verbalize_text(other, &forms) == "Wen Jiabao Reject China in 2009-05-08");
}

TEST_CASE("surface form maps load from JSON") {
    SurfaceForms forms = SurfaceForms::load(testing::data_path("surface_forms.json"));
    CHECK(forms.size() == 3);
    REQUIRE(forms.lookup("Make a visit") != nullptr);
    CHECK(*forms.lookup("Make a visit") == "made a visit to");
    CHECK(forms.lookup("Unmapped predicate") == nullptr);

    TemporalFact f = TemporalFact::point("Georgios Papandreou", "Make a visit", "China",
                                         TimeStamp::of_day(2009, 5, 12));
    CHECK(verbalize_text(f, &forms) ==
          "Georgios Papandreou made a visit to China in 2009-05-12");
}

TEST_CASE("verbalization is deterministic and injective across distinct facts") {
    TemporalFact a = TemporalFact::point("A", "r", "B", TimeStamp::of_day(2009, 5, 11));
    TemporalFact b = TemporalFact::point("A", "r", "B", TimeStamp::of_day(2009, 5, 12));
    CHECK(verbalize_text(a) == verbalize_text(a));
    CHECK(verbalize_text(a) != verbalize_text(b));
}

TEST_CASE("verbalize_store emits one statement per fact in fact_id order") {
    TkgStore store = TkgStore::from_facts(testing::synthetic_facts(25, 3));
    auto first = verbalize_store(store);
    REQUIRE(first.size() == 25);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].fact_id == static_cast<std::int64_t>(i));
    }
    auto second = verbalize_store(store);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].text == second[i].text);  // idempotent
    }
}

TEST_CASE("empty store verbalizes to an empty list") {
    TkgStore store;
    CHECK(verbalize_store(store).empty());
}

TEST_CASE("every output matches the template pattern") {
    static const std::regex pattern(
        R"(^.+ .+ .+ (in \d{4}(-\d{2}(-\d{2})?)?|from .+ to .+)$)");
    TkgStore store = TkgStore::from_facts(testing::synthetic_facts(200, 5));
    for (const auto& vf : verbalize_store(store)) {
        CAPTURE(vf.text);
        CHECK(std::regex_match(vf.text, pattern));
    }
    TemporalFact interval = TemporalFact::interval("A", "r", "B", TimeStamp::of_month(2001, 2),
                                                   TimeStamp::of_year(2003));
    CHECK(std::regex_match(verbalize_text(interval), pattern));
}

}  // TEST_SUITE
