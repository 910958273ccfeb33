#include <atomic>
#include <filesystem>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"
#include "chronoqa/llm.hpp"
#include "chronoqa/prompts.hpp"

using namespace chronoqa;
namespace fs = std::filesystem;

namespace {

LlmRequest sample_request(const std::string& content = "What year is it?") {
    LlmRequest r;
    r.model_id = "test-model";
    r.user_content = content;
    return r;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Joins the listener thread on scope exit even when an assertion throws.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1"; }
};

}  // namespace

TEST_SUITE("llm_gateway") {

TEST_CASE("request hash covers exactly the four request fields") {
    LlmRequest a = sample_request();
    LlmRequest b = a;
    CHECK(request_hash(a) == request_hash(b));

    b.user_content = "different";
    CHECK(request_hash(a) != request_hash(b));
    b = a;
    b.model_id = "other-model";
    CHECK(request_hash(a) != request_hash(b));
    b = a;
    b.system_instruction = "be terse";
    CHECK(request_hash(a) != request_hash(b));
    b = a;
    b.temperature = 0.7;
    CHECK(request_hash(a) != request_hash(b));
}

TEST_CASE("scripted gateway replays fixtures and fails loudly on a miss") {
    FixtureSet fixtures;
    LlmRequest req = sample_request();
    fixtures.add(req, "So the answer is: 2008", "unit test");
    LlmGateway gateway = LlmGateway::scripted(std::move(fixtures));

    LlmResponse res = gateway.complete(req);
    CHECK(res.text == "So the answer is: 2008");
    CHECK(res.origin == LlmOrigin::Scripted);
    CHECK(gateway.call_count() == 1);

    LlmRequest miss = sample_request("unseen");
    try {
        gateway.complete(miss);
        FAIL("expected FixtureMiss");
    } catch (const FixtureMiss& e) {
        CHECK(e.request_hash() == request_hash(miss));
    }
}

TEST_CASE("fixture error entries raise ApiError") {
    FixtureSet fixtures;
    LlmRequest req = sample_request();
    fixtures.add_error(req, "scripted outage", "unit test");
    LlmGateway gateway = LlmGateway::scripted(std::move(fixtures));
    CHECK_THROWS_AS(gateway.complete(req), ApiError);
}

TEST_CASE("fixture files round-trip with their sidecar") {
    fs::path dir = fresh_dir("chronoqa_fixture_test");
    fs::path path = dir / "fixtures.json";

    FixtureSet fixtures;
    fixtures.add(sample_request("q one"), "a one", "first question");
    fixtures.add_error(sample_request("q two"), "boom", "second question");
    fixtures.save(path);
    CHECK(fs::exists(FixtureSet::sidecar_path(path)));

    FixtureSet loaded = FixtureSet::load(path);
    CHECK(loaded.size() == 2);
    const auto* one = loaded.find(request_hash(sample_request("q one")));
    REQUIRE(one != nullptr);
    CHECK(one->text == "a one");
    CHECK(!one->is_error);
    const auto* two = loaded.find(request_hash(sample_request("q two")));
    REQUIRE(two != nullptr);
    CHECK(two->is_error);
}

TEST_CASE("cached mode misses until warmed") {
    fs::path dir = fresh_dir("chronoqa_llm_cache_test");
    LlmGateway gateway = LlmGateway::cached(dir);
    CHECK_THROWS_AS(gateway.complete(sample_request()), CacheMiss);
}

TEST_CASE("responder gateway answers and records fixtures") {
    FixtureSet recorded;
    LlmGateway gateway =
        LlmGateway::from_responder([](const LlmRequest& r) { return "echo: " + r.user_content; });
    gateway.record_to(&recorded);
    gateway.set_record_note("probe");
    CHECK(gateway.complete(sample_request("hello")).text == "echo: hello");
    CHECK(recorded.size() == 1);
    CHECK(recorded.find(request_hash(sample_request("hello"))) != nullptr);
}

TEST_CASE("token estimate uses the chars/4 heuristic") {
    CHECK(estimate_tokens(0) == 0);
    CHECK(estimate_tokens(1) == 1);
    CHECK(estimate_tokens(4) == 1);
    CHECK(estimate_tokens(5) == 2);
    CHECK(estimate_tokens(400) == 100);
}

TEST_CASE("live mode talks to an OpenAI-compatible endpoint, caches and replays") {
    std::atomic<int> hits{0};
    std::atomic<bool> saw_expected_body{true};
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auto body = nlohmann::json::parse(req.body);
        if (body.at("model") != "test-model" || body.at("temperature").get<double>() != 0.0) {
            saw_expected_body = false;
        }
        std::string content = body.at("messages").back().at("content").get<std::string>();
        nlohmann::json reply{
            {"choices",
             {{{"message", {{"role", "assistant"}, {"content", "seen: " + content}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    fs::path cache = fresh_dir("chronoqa_live_cache_test");
    LiveLlmConfig config;
    config.base_url = server.base_url();
    config.backoff_base_sec = 0.01;
    LlmGateway gateway = LlmGateway::live(config, cache);

    LlmRequest req = sample_request("ping");
    LlmResponse first = gateway.complete(req);
    CHECK(first.text == "seen: ping");
    CHECK(first.origin == LlmOrigin::Live);
    CHECK(gateway.network_call_count() == 1);

    LlmResponse second = gateway.complete(req);
    CHECK(second.text == first.text);
    CHECK(second.origin == LlmOrigin::Cached);
    CHECK(gateway.network_call_count() == 1);  // served from cache
    CHECK(hits == 1);

    // Replay closure: a cached-mode gateway over the same directory answers
    // with zero network calls.
    LlmGateway replay = LlmGateway::cached(cache);
    LlmResponse third = replay.complete(req);
    CHECK(third.text == first.text);
    CHECK(third.origin == LlmOrigin::Cached);
    CHECK(replay.network_call_count() == 0);
    CHECK(saw_expected_body);
}

TEST_CASE("live mode retries transient failures with backoff") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 500;
            res.set_content("transient", "text/plain");
            return;
        }
        nlohmann::json reply{
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "recovered"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    fs::path cache = fresh_dir("chronoqa_live_retry_test");
    LiveLlmConfig config;
    config.base_url = server.base_url();
    config.backoff_base_sec = 0.01;
    LlmGateway gateway = LlmGateway::live(config, cache);

    LlmResponse res = gateway.complete(sample_request("retry me"));
    CHECK(res.text == "recovered");
    CHECK(hits == 3);
}

TEST_CASE("live mode surfaces a terminal ApiError with status and retries") {
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("down", "text/plain");
    });

    fs::path cache = fresh_dir("chronoqa_live_fail_test");
    LiveLlmConfig config;
    config.base_url = server.base_url();
    config.backoff_base_sec = 0.005;
    config.max_retries = 2;
    LlmGateway gateway = LlmGateway::live(config, cache);

    try {
        gateway.complete(sample_request("doomed"));
        FAIL("expected ApiError");
    } catch (const ApiError& e) {
        CHECK(e.status() == 500);
        CHECK(e.retries() == 2);
    }
}

TEST_CASE("client errors are not retried") {
    std::atomic<int> hits{0};
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("unauthorized", "text/plain");
    });

    fs::path cache = fresh_dir("chronoqa_live_auth_test");
    LiveLlmConfig config;
    config.base_url = server.base_url();
    config.backoff_base_sec = 0.005;
    LlmGateway gateway = LlmGateway::live(config, cache);

    CHECK_THROWS_AS(gateway.complete(sample_request("no key")), ApiError);
    CHECK(hits == 1);
}

}  // TEST_SUITE

TEST_SUITE("prompts") {

TEST_CASE("every registered template renders deterministically") {
    for (const auto& id : template_ids()) {
        const PromptTemplate& tpl = get_template(id);
        CHECK(tpl.template_id == id);
        CHECK(!tpl.instruction.empty());
    }
    CHECK_THROWS_AS(get_template("no_such_template"), UnknownTemplate);
}

TEST_CASE("question-answer rendering ends with the new question") {
    const PromptTemplate& tpl = get_template(kTplDecomposeDirect);
    std::string prompt = render_prompt(tpl, "Who visited Japan in April 2012?");
    CHECK(prompt.find(tpl.instruction) == 0);
    // Few-shot examples appear, in order, before the final question.
    std::size_t last = 0;
    for (const auto& [input, output] : tpl.few_shot) {
        auto at = prompt.find("Q: " + input);
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    std::string tail = "Q: Who visited Japan in April 2012?\nA:";
    CHECK(prompt.rfind(tail) == prompt.size() - tail.size());
    CHECK(prompt == render_prompt(tpl, "Who visited Japan in April 2012?"));
}

TEST_CASE("a template without examples renders instruction plus question") {
    PromptTemplate bare;
    bare.template_id = "bare";
    bare.instruction = "Answer briefly.";
    CHECK(render_prompt(bare, "Why?") == "Answer briefly.\n\nQ: Why?\nA:");
}

TEST_CASE("fact-block rendering lists facts before the question") {
    const PromptTemplate& tpl = get_template(kTplReasonFacts);
    std::string prompt = render_prompt(tpl, "Who visited China?",
                                       {"A Make a visit China in 2009-05-12.",
                                        "B Make a visit China in 2009-05-08."});
    std::string tail =
        "Historical facts:\nA Make a visit China in 2009-05-12.\nB Make a visit China in "
        "2009-05-08.\nQuestion: Who visited China?\nAnswer:";
    CHECK(prompt.rfind(tail) == prompt.size() - tail.size());
}

TEST_CASE("relevant-facts template uses its own label") {
    const PromptTemplate& tpl = get_template(kTplPickFirstLast);
    std::string prompt =
        render_prompt(tpl, "Who was the last one among them?", {"[China 2006-01-20]"});
    CHECK(prompt.find("Relevant facts:\n[China 2006-01-20]") != std::string::npos);
}

TEST_CASE("aggregation rendering labels sources with C capitalized") {
    const PromptTemplate& tpl = get_template(kTplAggregate);
    std::string prompt = render_aggregation_prompt(
        tpl, "Who?", {{"A", "Sri Lanka"}, {"B", "China"}, {"C", "Unknown"}});
    CHECK(prompt.find("source A: Sri Lanka\nsource B: China\nSource C: Unknown\nOutput:") !=
          std::string::npos);
}

}  // TEST_SUITE
