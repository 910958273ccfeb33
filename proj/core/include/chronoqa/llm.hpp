#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace chronoqa {

struct LlmRequest {
    std::string model_id;
    std::string system_instruction;
    std::string user_content;
    double temperature = 0.0;
};

// Stable identity of a request. Covers (model_id, system_instruction,
// user_content, temperature) and nothing else, so recorded fixtures survive
// refactors of the surrounding code.
std::string request_hash(const LlmRequest& request);

enum class LlmOrigin { Scripted, Cached, Live };

struct LlmResponse {
    std::string text;
    LlmOrigin origin = LlmOrigin::Scripted;
    int token_estimate = 0;  // chars/4 heuristic, for budget logging only
};

enum class LlmMode { Scripted, Cached, Live };

const char* to_string(LlmMode m);
LlmMode llm_mode_from_string(const std::string& s);

// A recorded request->response map. The main file is a JSON object
// {request-hash: response text | {"error": message}}; a sidecar file lists
// the originating question per hash for auditability.
class FixtureSet {
public:
    struct Entry {
        std::string text;
        bool is_error = false;
    };

    FixtureSet() = default;

    static FixtureSet load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;  // writes path + sidecar

    void add(const LlmRequest& request, std::string response, std::string note = "");
    void add_error(const LlmRequest& request, std::string message, std::string note = "");

    const Entry* find(const std::string& hash) const;
    std::size_t size() const { return entries_.size(); }

    static std::filesystem::path sidecar_path(const std::filesystem::path& path);

private:
    std::map<std::string, Entry> entries_;
    struct SidecarRow {
        std::string hash;
        std::string note;
        std::string user_head;  // first line of the user content
    };
    std::vector<SidecarRow> sidecar_;
};

struct LiveLlmConfig {
    std::string base_url;  // OpenAI-compatible, e.g. "https://api.openai.com/v1"
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_sec = 120;
    int max_retries = 3;
    double backoff_base_sec = 0.5;
    int max_parallel = 4;
};

// Uniform chat-completion interface. Scripted mode replays fixtures and
// fails loudly on a miss; Cached mode replays the on-disk cache; Live mode
// answers from the cache when warm and otherwise calls an OpenAI-compatible
// endpoint, persisting every response (write-temp-then-rename).
class LlmGateway {
public:
    static LlmGateway scripted(const std::filesystem::path& fixture_path);
    static LlmGateway scripted(FixtureSet fixtures);
    static LlmGateway cached(const std::filesystem::path& cache_dir);
    static LlmGateway live(LiveLlmConfig config, const std::filesystem::path& cache_dir);
    // Test double: answers every request through the callback (counted like
    // any other backend; origin is Scripted).
    static LlmGateway from_responder(std::function<std::string(const LlmRequest&)> responder);

    LlmResponse complete(const LlmRequest& request);

    LlmMode mode() const { return mode_; }
    std::uint64_t call_count() const { return calls_->load(); }
    std::uint64_t network_call_count() const { return network_calls_->load(); }

    // When set, every completed request/response pair is recorded (useful for
    // turning one live run into a scripted fixture file).
    void record_to(FixtureSet* recorder) { recorder_ = recorder; }
    void set_record_note(std::string note);

    LlmGateway(LlmGateway&&) = default;
    LlmGateway& operator=(LlmGateway&&) = default;

private:
    LlmGateway() = default;

    LlmResponse from_cache(const std::string& hash);
    std::optional<std::string> cache_lookup(const std::string& hash) const;
    void cache_store(const std::string& hash, const std::string& text) const;
    std::string call_endpoint(const LlmRequest& request);
    void record(const LlmRequest& request, const std::string& text);

    LlmMode mode_ = LlmMode::Scripted;
    FixtureSet fixtures_;
    std::filesystem::path cache_dir_;
    bool has_cache_ = false;
    LiveLlmConfig live_;
    std::unique_ptr<std::counting_semaphore<>> live_gate_;  // parallelism cap
    std::function<std::string(const LlmRequest&)> responder_;
    FixtureSet* recorder_ = nullptr;
    std::string record_note_;
    std::unique_ptr<std::mutex> record_mutex_ = std::make_unique<std::mutex>();
    std::unique_ptr<std::atomic<std::uint64_t>> calls_ =
        std::make_unique<std::atomic<std::uint64_t>>(0);
    std::unique_ptr<std::atomic<std::uint64_t>> network_calls_ =
        std::make_unique<std::atomic<std::uint64_t>>(0);
};

int estimate_tokens(std::size_t chars);

}  // namespace chronoqa
