#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "chronoqa/errors.hpp"
#include "chronoqa/pipeline.hpp"

#include "support/paths.hpp"
#include "support/scripted_server.hpp"

using namespace chronoqa;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << content;
}

RunConfig base_config(const fs::path& dir) {
    RunConfig c;
    c.tkg_path = testing::data_path("visits_mini.tsv");
    c.tkg_format = "tsv-quadruple";
    c.dataset_path = (dir / "dataset.jsonl").string();
    c.work_dir = (dir / "run").string();
    c.cache_dir = (dir / "cache").string();
    c.llm_mode = "live";  // overridden per test
    c.llm_base_url = "http://unused";
    c.llm_backoff_sec = 0.01;
    c.top_k = 10;
    return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config validation rejects bad values") {
    RunConfig c;
    c.fixture_path = "fixtures.json";
    CHECK_NOTHROW(c.validate());
    RunConfig bad_k = c;
    bad_k.top_k = 0;
    CHECK_THROWS_AS(bad_k.validate(), ConfigError);
    RunConfig bad_mode = c;
    bad_mode.llm_mode = "psychic";
    CHECK_THROWS_AS(bad_mode.validate(), ConfigError);
    RunConfig no_fixture = c;
    no_fixture.fixture_path.reset();
    CHECK_THROWS_AS(no_fixture.validate(), ConfigError);  // scripted without fixtures
    RunConfig live_no_url = c;
    live_no_url.llm_mode = "live";
    CHECK_THROWS_AS(live_no_url.validate(), ConfigError);
}

TEST_CASE("config JSON round-trips") {
    RunConfig c;
    c.fixture_path = "f.json";
    c.top_k = 25;
    c.seed = 7u;
    RunConfig back = RunConfig::from_json(c.to_json());
    CHECK(back.top_k == 25);
    CHECK(back.fixture_path == c.fixture_path);
    CHECK(back.seed == c.seed);
    CHECK(back.to_json() == c.to_json());
}

TEST_CASE("dataset loading surfaces malformed rows") {
    fs::path dir = fresh_dir("chronoqa_dataset_test");
    write_file(dir / "ds.jsonl",
               R"({"question_id":"q1","question":"Who?","answers":["X"]})"
               "\nnot json\n");
    CHECK_THROWS_AS(load_dataset((dir / "ds.jsonl").string()), MalformedLine);
    CHECK_THROWS_AS(load_dataset("/no/such/dataset.jsonl"), IoError);

    write_file(dir / "ok.jsonl",
               R"({"question_id":"q1","question":"Who?","qtype":"equal","answer_type":"entity","time_level":"day","answers":["X"],"gold_fact_ids":[1,2]})"
               "\n");
    auto rows = load_dataset((dir / "ok.jsonl").string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].question_id == "q1");
    CHECK(rows[0].qtype_hint == std::optional<std::string>("equal"));
    CHECK(rows[0].answer_type == AnswerType::Entity);
    CHECK(rows[0].time_granularity == Granularity::Day);
    CHECK(rows[0].gold_fact_ids == std::set<std::int64_t>{1, 2});
}

TEST_CASE("ingest writes a snapshot and a manifest with counts") {
    fs::path dir = fresh_dir("chronoqa_ingest_test");
    RunConfig c = base_config(dir);
    write_file(dir / "dataset.jsonl", "");
    StageResult r = run_ingest(c);
    CHECK(fs::exists(r.output_path));
    CHECK(fs::exists(r.output_path + ".manifest.json"));
    CHECK(r.manifest.at("facts") == 25);
    CHECK(r.manifest.at("stage") == "ingest");
    // 25 snapshot lines, fact ids consecutive.
    std::string snapshot = read_file(r.output_path);
    CHECK(std::count(snapshot.begin(), snapshot.end(), '\n') == 25);

    StageResult idx = run_index(c);
    CHECK(idx.manifest.at("entries") == 25);
}

TEST_CASE("full pipeline: live run, scripted replay, eval and stats") {
    fs::path dir = fresh_dir("chronoqa_pipeline_e2e");

    // Two questions over the mini KG; answers are scripted by question text.
    write_file(dir / "dataset.jsonl",
               R"({"question_id":"q1","question":"Before Georgios Papandreou, who was the last to visit China?","qtype":"before_last","answer_type":"entity","answers":["Wen Jiabao"],"gold_fact_ids":[0,22]})"
               "\n"
               R"({"question_id":"q2","question":"When did Georgios Papandreou visit China?","qtype":"equal","answer_type":"time","time_level":"day","answers":["2009-05-12"]})"
               "\n");

    std::map<std::string, std::string> answers = {
        {"Before Georgios Papandreou, who was the last to visit China?",
         R"({"Before Georgios Papandreou, who was the last to visit China?": ["When did Georgios Papandreou visit China?", "Who visited China before #1?", "Who was the last one among them?"]})"},
        {"When did Georgios Papandreou visit China?",
         R"({"When did Georgios Papandreou visit China?": []})"},
        {"Who visited China before 2009-05-12?",
         "So the answer is: [Wen Jiabao 2009-05-08], [France 2009-05-07]"},
        {"Who was the last one among them?",
         "So the answer is: [Wen Jiabao 2009-05-08]"},
    };
    // The reasoning prompt for q2's single node and q1's node 0 share the
    // question text; the IR pass over the root needs its own answer. The
    // decompose and reason templates differ, so the same key serves both.
    testing::ScriptedServer server(answers);

    RunConfig c = base_config(dir);
    c.llm_base_url = server.base_url();
    c.record_fixtures_path = (dir / "fixtures.json").string();

    // The reasoning answer for the shared question text.
    // (Question text lookups are prompt-kind agnostic in ScriptedServer, so
    // "When did Georgios Papandreou visit China?" returns the decomposition
    // JSON for the reason prompt too; the solver then finds no anchor and
    // yields Unknown for q2's IR answer. That is fine for this test: q1's
    // root aggregation still resolves via child answers.)
    StageResult dec = run_decompose(c);
    CHECK(dec.manifest.at("questions") == 2);
    CHECK(fs::exists(*c.record_fixtures_path));

    StageResult solve = run_solve(c);
    CHECK(solve.manifest.at("questions") == 2);
    std::string first_bytes = read_file(solve.output_path);
    CHECK(first_bytes.find("[Wen Jiabao 2009-05-08]") != std::string::npos);

    // Replay the recorded fixtures without the server: byte-identical output.
    RunConfig replay = c;
    replay.llm_mode = "scripted";
    replay.fixture_path = c.record_fixtures_path;
    replay.llm_base_url.clear();
    replay.record_fixtures_path.reset();
    StageResult replayed = run_solve(replay);
    CHECK(replayed.manifest.at("network_calls") == 0);
    CHECK(read_file(replayed.output_path) == first_bytes);

    // Cached mode replays from the llm cache written by the live run.
    RunConfig cached = replay;
    cached.llm_mode = "cached";
    cached.fixture_path.reset();
    StageResult cached_run = run_solve(cached);
    CHECK(cached_run.manifest.at("network_calls") == 0);
    CHECK(read_file(cached_run.output_path) == first_bytes);

    // Eval: q1 hits (Wen Jiabao in the final list).
    StageResult eval = run_eval(replay);
    auto eval_json = nlohmann::json::parse(read_file(eval.output_path));
    CHECK(eval_json.at("summary").at("overall").at("hits1").get<double>() >= 0.5);
    CHECK(fs::exists(replay.eval_text_path()));

    // Stats: two trees, depth 1 and 0.
    StageResult stats = run_stats(replay);
    auto stats_json = nlohmann::json::parse(read_file(stats.output_path));
    CHECK(stats_json.at("avg_depth").get<double>() == doctest::Approx(0.5));
    CHECK(stats_json.at("questions") == 2);
    // gold_fact_ids present for q1 -> a recall curve is emitted.
    CHECK(stats_json.contains("recall_curve"));
}

TEST_CASE("eval on empty solve output raises EmptyRecordSet") {
    fs::path dir = fresh_dir("chronoqa_eval_empty");
    RunConfig c = base_config(dir);
    c.llm_mode = "cached";
    c.llm_base_url.clear();
    write_file(dir / "dataset.jsonl",
               R"({"question_id":"q1","question":"Who?","answers":["X"]})"
               "\n");
    fs::create_directories(c.work_dir);
    write_file(fs::path(c.solve_path()), "");
    CHECK_THROWS_AS(run_eval(c), EmptyRecordSet);
}

TEST_CASE("limit and seed select question subsets") {
    fs::path dir = fresh_dir("chronoqa_limit_test");
    std::string rows;
    for (int i = 0; i < 10; ++i) {
        rows += R"({"question_id":"q)" + std::to_string(i) +
                R"(","question":"Who visited France in 2009-05?","answers":["X"]})" "\n";
    }
    write_file(dir / "dataset.jsonl", rows);

    std::map<std::string, std::string> answers = {
        {"Who visited France in 2009-05?", R"({"Who visited France in 2009-05?": []})"},
    };
    testing::ScriptedServer server(answers);
    RunConfig c = base_config(dir);
    c.llm_base_url = server.base_url();
    c.limit = 3;
    StageResult dec = run_decompose(c);
    CHECK(dec.manifest.at("questions") == 3);

    c.seed = 99u;
    StageResult sampled = run_decompose(c);
    CHECK(sampled.manifest.at("questions") == 3);
}

}  // TEST_SUITE
