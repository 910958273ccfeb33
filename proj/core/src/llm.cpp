#include "chronoqa/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"
#include "digest.hpp"
#include "http_url.hpp"

#include <unistd.h>

namespace chronoqa {

std::string request_hash(const LlmRequest& request) {
    // nlohmann::json objects are key-sorted, so the dump is canonical.
    nlohmann::json j{{"model_id", request.model_id},
                     {"system_instruction", request.system_instruction},
                     {"temperature", request.temperature},
                     {"user_content", request.user_content}};
    return detail::sha256_hex(j.dump());
}

const char* to_string(LlmMode m) {
    switch (m) {
        case LlmMode::Scripted: return "scripted";
        case LlmMode::Cached: return "cached";
        case LlmMode::Live: return "live";
    }
    return "scripted";
}

LlmMode llm_mode_from_string(const std::string& s) {
    if (s == "scripted") return LlmMode::Scripted;
    if (s == "cached") return LlmMode::Cached;
    if (s == "live") return LlmMode::Live;
    throw ConfigError("unknown llm mode: " + s);
}

int estimate_tokens(std::size_t chars) {
    return static_cast<int>((chars + 3) / 4);
}

// ---------------------------------------------------------------------------
// FixtureSet

std::filesystem::path FixtureSet::sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".sidecar.json";
    return p;
}

FixtureSet FixtureSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fixture file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid fixture file " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw IoError("fixture file must be a JSON object: " + path.string());

    FixtureSet set;
    for (auto& [hash, value] : j.items()) {
        Entry entry;
        if (value.is_string()) {
            entry.text = value.get<std::string>();
        } else if (value.is_object() && value.contains("error")) {
            entry.is_error = true;
            entry.text = value.at("error").get<std::string>();
        } else {
            throw IoError("fixture entry for " + hash + " must be a string or {\"error\": ...}");
        }
        set.entries_[hash] = std::move(entry);
    }
    std::ifstream side_in(sidecar_path(path));
    if (side_in) {
        nlohmann::json side;
        try {
            side_in >> side;
            for (const auto& row : side) {
                set.sidecar_.push_back(SidecarRow{row.value("hash", ""), row.value("note", ""),
                                                  row.value("user_head", "")});
            }
        } catch (const nlohmann::json::exception&) {
            // A damaged sidecar only degrades auditability; fixtures still load.
        }
    }
    return set;
}

void FixtureSet::save(const std::filesystem::path& path) const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [hash, entry] : entries_) {
        if (entry.is_error) {
            j[hash] = nlohmann::json{{"error", entry.text}};
        } else {
            j[hash] = entry.text;
        }
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write fixture file: " + path.string());
        out << j.dump(2) << "\n";
    }
    nlohmann::json side = nlohmann::json::array();
    for (const auto& row : sidecar_) {
        side.push_back(nlohmann::json{
            {"hash", row.hash}, {"note", row.note}, {"user_head", row.user_head}});
    }
    std::ofstream out(sidecar_path(path), std::ios::trunc);
    if (!out) throw IoError("cannot write fixture sidecar: " + sidecar_path(path).string());
    out << side.dump(2) << "\n";
}

namespace {

std::string user_head(const std::string& content) {
    auto nl = content.find('\n');
    std::string head = nl == std::string::npos ? content : content.substr(0, nl);
    if (head.size() > 160) head.resize(160);
    return head;
}

}  // namespace

void FixtureSet::add(const LlmRequest& request, std::string response, std::string note) {
    std::string hash = request_hash(request);
    entries_[hash] = Entry{std::move(response), false};
    sidecar_.push_back(SidecarRow{hash, std::move(note), user_head(request.user_content)});
}

void FixtureSet::add_error(const LlmRequest& request, std::string message, std::string note) {
    std::string hash = request_hash(request);
    entries_[hash] = Entry{std::move(message), true};
    sidecar_.push_back(SidecarRow{hash, std::move(note), user_head(request.user_content)});
}

const FixtureSet::Entry* FixtureSet::find(const std::string& hash) const {
    auto it = entries_.find(hash);
    return it == entries_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// LlmGateway

LlmGateway LlmGateway::scripted(const std::filesystem::path& fixture_path) {
    return scripted(FixtureSet::load(fixture_path));
}

LlmGateway LlmGateway::scripted(FixtureSet fixtures) {
    LlmGateway g;
    g.mode_ = LlmMode::Scripted;
    g.fixtures_ = std::move(fixtures);
    return g;
}

LlmGateway LlmGateway::cached(const std::filesystem::path& cache_dir) {
    LlmGateway g;
    g.mode_ = LlmMode::Cached;
    g.cache_dir_ = cache_dir;
    g.has_cache_ = true;
    std::filesystem::create_directories(g.cache_dir_);
    return g;
}

LlmGateway LlmGateway::live(LiveLlmConfig config, const std::filesystem::path& cache_dir) {
    if (config.base_url.empty()) throw ConfigError("live llm mode requires a base URL");
    LlmGateway g;
    g.mode_ = LlmMode::Live;
    g.live_ = std::move(config);
    g.live_gate_ = std::make_unique<std::counting_semaphore<>>(
        std::max(1, g.live_.max_parallel));
    g.cache_dir_ = cache_dir;
    g.has_cache_ = true;
    std::filesystem::create_directories(g.cache_dir_);
    return g;
}

LlmGateway LlmGateway::from_responder(std::function<std::string(const LlmRequest&)> responder) {
    LlmGateway g;
    g.mode_ = LlmMode::Scripted;
    g.responder_ = std::move(responder);
    return g;
}

void LlmGateway::set_record_note(std::string note) {
    std::lock_guard<std::mutex> lock(*record_mutex_);
    record_note_ = std::move(note);
}

void LlmGateway::record(const LlmRequest& request, const std::string& text) {
    if (!recorder_) return;
    std::lock_guard<std::mutex> lock(*record_mutex_);
    recorder_->add(request, text, record_note_);
}

std::optional<std::string> LlmGateway::cache_lookup(const std::string& hash) const {
    std::ifstream in(cache_dir_ / (hash + ".txt"), std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void LlmGateway::cache_store(const std::string& hash, const std::string& text) const {
    auto final_path = cache_dir_ / (hash + ".txt");
    auto tmp_path = final_path;
    tmp_path += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write llm cache entry: " + tmp_path.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    std::filesystem::rename(tmp_path, final_path);
}

std::string LlmGateway::call_endpoint(const LlmRequest& request) {
    const char* key = std::getenv(live_.api_key_env.c_str());

    auto [origin, path_prefix] = detail::split_base_url(live_.base_url);
    httplib::Client client(origin);
    client.set_connection_timeout(live_.timeout_sec, 0);
    client.set_read_timeout(live_.timeout_sec, 0);
    httplib::Headers headers;
    if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_instruction.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_instruction}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_content}});
    nlohmann::json body{{"model", request.model_id},
                        {"messages", messages},
                        {"temperature", request.temperature}};
    const std::string payload = body.dump();

    int attempts = live_.max_retries + 1;
    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            auto delay = live_.backoff_base_sec * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        auto res = client.Post(path_prefix + "/chat/completions", headers, payload,
                               "application/json");
        ++*network_calls_;
        if (!res) {
            last_status = 0;
            last_error = httplib::to_string(res.error());
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read) {
                continue;  // retryable
            }
            continue;
        }
        last_status = res->status;
        if (res->status == 200) {
            try {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("unparseable completion body: ") + e.what();
                continue;
            }
        }
        last_error = res->body.substr(0, 200);
        if (res->status >= 400 && res->status < 500 && res->status != 429) {
            throw ApiError("llm endpoint rejected request: " + last_error, res->status, attempt);
        }
    }
    if (last_status == 0 && last_error.find("imeout") != std::string::npos) {
        throw TimeoutError("llm endpoint timed out after " + std::to_string(attempts) +
                           " attempts");
    }
    throw ApiError("llm endpoint failed: " + last_error, last_status, live_.max_retries);
}

LlmResponse LlmGateway::complete(const LlmRequest& request) {
    ++*calls_;
    const std::string hash = request_hash(request);
    const std::size_t prompt_chars =
        request.system_instruction.size() + request.user_content.size();

    if (responder_) {
        std::string text = responder_(request);
        record(request, text);
        return LlmResponse{text, LlmOrigin::Scripted, estimate_tokens(prompt_chars + text.size())};
    }

    switch (mode_) {
        case LlmMode::Scripted: {
            const FixtureSet::Entry* entry = fixtures_.find(hash);
            if (!entry) throw FixtureMiss(hash);
            if (entry->is_error) throw ApiError("scripted failure: " + entry->text, 0, 0);
            return LlmResponse{entry->text, LlmOrigin::Scripted,
                               estimate_tokens(prompt_chars + entry->text.size())};
        }
        case LlmMode::Cached: {
            auto hit = cache_lookup(hash);
            if (!hit) throw CacheMiss(hash);
            return LlmResponse{*hit, LlmOrigin::Cached,
                               estimate_tokens(prompt_chars + hit->size())};
        }
        case LlmMode::Live: {
            if (auto hit = cache_lookup(hash)) {
                return LlmResponse{*hit, LlmOrigin::Cached,
                                   estimate_tokens(prompt_chars + hit->size())};
            }
            live_gate_->acquire();
            std::string text;
            try {
                text = call_endpoint(request);
            } catch (...) {
                live_gate_->release();
                throw;
            }
            live_gate_->release();
            cache_store(hash, text);
            record(request, text);
            return LlmResponse{text, LlmOrigin::Live,
                               estimate_tokens(prompt_chars + text.size())};
        }
    }
    throw Error("unreachable llm mode");
}

}  // namespace chronoqa
