#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronoqa/decomposer.hpp"
#include "chronoqa/embedder.hpp"
#include "chronoqa/eval.hpp"
#include "chronoqa/llm.hpp"
#include "chronoqa/solver.hpp"
#include "chronoqa/store.hpp"

namespace chronoqa {

// One dataset question: JSON-lines rows with keys question_id, question,
// qtype, answer_type, optional time_level, answers and gold_fact_ids.
struct DatasetQuestion {
    std::string question_id;
    std::string question;
    std::optional<std::string> qtype_hint;
    AnswerType answer_type = AnswerType::Entity;
    std::optional<Granularity> time_granularity;
    std::vector<std::string> answers;
    std::set<std::int64_t> gold_fact_ids;
};

std::vector<DatasetQuestion> load_dataset(const std::string& path);

// Whole-run configuration; every CLI stage consumes the same file.
struct RunConfig {
    std::string tkg_path;
    std::string tkg_format = "tsv-quadruple";
    bool lenient_load = false;
    std::string dataset_path;
    std::string work_dir = "run";
    std::string cache_dir = "cache";
    std::optional<std::string> fixture_path;
    std::optional<std::string> surface_forms_path;

    int top_k = kDefaultTopK;
    int max_depth = 4;
    std::string llm_mode = "scripted";
    std::string decompose_model = "gpt-4o-mini";
    std::string reason_model = "deepseek-v3";
    std::string aggregate_model = "gpt-4o-mini";
    std::string aggregation_mode = "rules";
    double temperature = 0.0;

    std::string index_backend = "exact";
    int embed_dim = 256;
    std::string embed_backend = "hashed-ngram";  // or "remote"
    std::string embed_base_url;
    std::string embed_model;
    std::string embed_api_key_env = "EMBEDDER_API_KEY";

    std::string llm_base_url;
    std::string api_key_env = "OPENAI_API_KEY";
    int llm_timeout_sec = 120;
    double llm_backoff_sec = 0.5;
    int parallelism = 1;

    std::optional<int> limit;        // take the first n questions
    std::optional<unsigned> seed;    // sample n questions instead
    bool store_chains = false;
    std::optional<std::string> record_fixtures_path;  // live mode capture

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;

    std::string trees_path() const;
    std::string solve_path() const;
    std::string eval_json_path() const;
    std::string eval_text_path() const;
    std::string store_snapshot_path() const;
    std::string index_manifest_path() const;
    std::string stats_json_path() const;
    std::string stats_text_path() const;
};

struct StageResult {
    std::string output_path;
    nlohmann::json manifest;  // config/input hashes and counters; no timestamps
};

// Stage runners behind the CLI subcommands. Each reads the previous stage's
// output file, writes its own plus a sibling .manifest.json, and is
// idempotent for identical inputs and warm caches.
StageResult run_ingest(const RunConfig& config);
StageResult run_index(const RunConfig& config);
StageResult run_decompose(const RunConfig& config);
StageResult run_solve(const RunConfig& config);
StageResult run_eval(const RunConfig& config);
StageResult run_stats(const RunConfig& config);

// SHA-256 of a file's bytes (manifest inputs).
std::string file_digest(const std::string& path);

}  // namespace chronoqa
