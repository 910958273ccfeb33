#include "chronoqa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "chronoqa/eval.hpp"
#include "chronoqa/errors.hpp"
#include "digest.hpp"

namespace chronoqa {

namespace fs = std::filesystem;

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return detail::sha256_hex(bytes);
}

// ---------------------------------------------------------------------------
// Dataset

std::vector<DatasetQuestion> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    std::vector<DatasetQuestion> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedLine(line_no, std::string("invalid dataset JSON: ") + e.what());
        }
        DatasetQuestion q;
        try {
            q.question_id = j.contains("question_id")
                                ? j.at("question_id").get<std::string>()
                                : "q" + std::to_string(line_no);
            q.question = j.at("question").get<std::string>();
            if (j.contains("qtype") && !j.at("qtype").is_null()) {
                q.qtype_hint = j.at("qtype").get<std::string>();
            }
            if (j.contains("answer_type") && !j.at("answer_type").is_null()) {
                if (auto t = answer_type_from_string(j.at("answer_type").get<std::string>())) {
                    q.answer_type = *t;
                }
            }
            if (j.contains("time_level") && !j.at("time_level").is_null()) {
                q.time_granularity = granularity_from_string(j.at("time_level").get<std::string>());
            }
            if (j.contains("answers")) {
                q.answers = j.at("answers").get<std::vector<std::string>>();
            }
            if (j.contains("gold_fact_ids")) {
                for (const auto& id : j.at("gold_fact_ids")) {
                    q.gold_fact_ids.insert(id.get<std::int64_t>());
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw MalformedLine(line_no, std::string("bad dataset row: ") + e.what());
        }
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

std::vector<DatasetQuestion> select_questions(const RunConfig& config) {
    std::vector<DatasetQuestion> all = load_dataset(config.dataset_path);
    if (config.seed) {
        std::mt19937 rng(*config.seed);
        std::shuffle(all.begin(), all.end(), rng);
    }
    if (config.limit && static_cast<std::size_t>(*config.limit) < all.size()) {
        all.resize(static_cast<std::size_t>(*config.limit));
    }
    return all;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    auto get_string = [&](const char* key, std::string& out) {
        if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
    };
    auto get_opt_string = [&](const char* key, std::optional<std::string>& out) {
        if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
    };
    get_string("tkg_path", c.tkg_path);
    get_string("tkg_format", c.tkg_format);
    if (j.contains("lenient_load")) c.lenient_load = j.at("lenient_load").get<bool>();
    get_string("dataset_path", c.dataset_path);
    get_string("work_dir", c.work_dir);
    get_string("cache_dir", c.cache_dir);
    get_opt_string("fixture_path", c.fixture_path);
    get_opt_string("surface_forms_path", c.surface_forms_path);
    if (j.contains("top_k")) c.top_k = j.at("top_k").get<int>();
    if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<int>();
    get_string("llm_mode", c.llm_mode);
    get_string("decompose_model", c.decompose_model);
    get_string("reason_model", c.reason_model);
    get_string("aggregate_model", c.aggregate_model);
    get_string("aggregation_mode", c.aggregation_mode);
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    get_string("index_backend", c.index_backend);
    if (j.contains("embed_dim")) c.embed_dim = j.at("embed_dim").get<int>();
    get_string("embed_backend", c.embed_backend);
    get_string("embed_base_url", c.embed_base_url);
    get_string("embed_model", c.embed_model);
    get_string("embed_api_key_env", c.embed_api_key_env);
    get_string("llm_base_url", c.llm_base_url);
    get_string("api_key_env", c.api_key_env);
    if (j.contains("llm_timeout_sec")) c.llm_timeout_sec = j.at("llm_timeout_sec").get<int>();
    if (j.contains("llm_backoff_sec")) c.llm_backoff_sec = j.at("llm_backoff_sec").get<double>();
    if (j.contains("parallelism")) c.parallelism = j.at("parallelism").get<int>();
    if (j.contains("limit") && !j.at("limit").is_null()) c.limit = j.at("limit").get<int>();
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<unsigned>();
    if (j.contains("store_chains")) c.store_chains = j.at("store_chains").get<bool>();
    get_opt_string("record_fixtures_path", c.record_fixtures_path);
    c.validate();
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["tkg_path"] = tkg_path;
    j["tkg_format"] = tkg_format;
    j["lenient_load"] = lenient_load;
    j["dataset_path"] = dataset_path;
    j["work_dir"] = work_dir;
    j["cache_dir"] = cache_dir;
    j["fixture_path"] = fixture_path ? nlohmann::json(*fixture_path) : nlohmann::json(nullptr);
    j["surface_forms_path"] =
        surface_forms_path ? nlohmann::json(*surface_forms_path) : nlohmann::json(nullptr);
    j["top_k"] = top_k;
    j["max_depth"] = max_depth;
    j["llm_mode"] = llm_mode;
    j["decompose_model"] = decompose_model;
    j["reason_model"] = reason_model;
    j["aggregate_model"] = aggregate_model;
    j["aggregation_mode"] = aggregation_mode;
    j["temperature"] = temperature;
    j["index_backend"] = index_backend;
    j["embed_dim"] = embed_dim;
    j["embed_backend"] = embed_backend;
    j["embed_base_url"] = embed_base_url;
    j["embed_model"] = embed_model;
    j["embed_api_key_env"] = embed_api_key_env;
    j["llm_base_url"] = llm_base_url;
    j["api_key_env"] = api_key_env;
    j["llm_timeout_sec"] = llm_timeout_sec;
    j["llm_backoff_sec"] = llm_backoff_sec;
    j["parallelism"] = parallelism;
    j["limit"] = limit ? nlohmann::json(*limit) : nlohmann::json(nullptr);
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["store_chains"] = store_chains;
    j["record_fixtures_path"] =
        record_fixtures_path ? nlohmann::json(*record_fixtures_path) : nlohmann::json(nullptr);
    return j;
}

void RunConfig::validate() const {
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    llm_mode_from_string(llm_mode);  // throws for unknown values
    tkg_format_from_string(tkg_format);
    index_backend_from_string(index_backend);
    aggregation_mode_from_string(aggregation_mode);
    if (embed_backend != "hashed-ngram" && embed_backend != "remote") {
        throw ConfigError("unknown embed backend: " + embed_backend);
    }
    if (llm_mode == "scripted" && !fixture_path) {
        throw ConfigError("scripted llm mode requires fixture_path");
    }
    if (llm_mode == "live" && llm_base_url.empty()) {
        throw ConfigError("live llm mode requires llm_base_url");
    }
}

std::string RunConfig::trees_path() const { return (fs::path(work_dir) / "trees.jsonl").string(); }
std::string RunConfig::solve_path() const { return (fs::path(work_dir) / "solve.jsonl").string(); }
std::string RunConfig::eval_json_path() const {
    return (fs::path(work_dir) / "eval.json").string();
}
std::string RunConfig::eval_text_path() const {
    return (fs::path(work_dir) / "eval.txt").string();
}
std::string RunConfig::store_snapshot_path() const {
    return (fs::path(work_dir) / "store.jsonl").string();
}
std::string RunConfig::index_manifest_path() const {
    return (fs::path(work_dir) / "index.json").string();
}
std::string RunConfig::stats_json_path() const {
    return (fs::path(work_dir) / "stats.json").string();
}
std::string RunConfig::stats_text_path() const {
    return (fs::path(work_dir) / "stats.txt").string();
}

// ---------------------------------------------------------------------------
// Shared construction helpers

namespace {

std::unique_ptr<Embedder> make_embedder(const RunConfig& config) {
    if (config.embed_backend == "remote") {
        RemoteEmbedderConfig rc;
        rc.base_url = config.embed_base_url;
        rc.model = config.embed_model;
        rc.api_key_env = config.embed_api_key_env;
        return std::make_unique<RemoteEmbedder>(
            rc, EmbeddingCache(fs::path(config.cache_dir) / "embeddings"));
    }
    return std::make_unique<HashedNgramEmbedder>(config.embed_dim);
}

LlmGateway make_gateway(const RunConfig& config) {
    switch (llm_mode_from_string(config.llm_mode)) {
        case LlmMode::Scripted:
            return LlmGateway::scripted(fs::path(*config.fixture_path));
        case LlmMode::Cached:
            return LlmGateway::cached(fs::path(config.cache_dir) / "llm");
        case LlmMode::Live: {
            LiveLlmConfig live;
            live.base_url = config.llm_base_url;
            live.api_key_env = config.api_key_env;
            live.timeout_sec = config.llm_timeout_sec;
            live.backoff_base_sec = config.llm_backoff_sec;
            live.max_parallel = config.parallelism;
            return LlmGateway::live(live, fs::path(config.cache_dir) / "llm");
        }
    }
    throw ConfigError("unreachable llm mode");
}

nlohmann::json base_manifest(const char* stage, const RunConfig& config) {
    nlohmann::json m;
    m["stage"] = stage;
    m["config_digest"] = detail::sha256_hex(config.to_json().dump());
    m["inputs"] = nlohmann::json::object();
    return m;
}

void write_manifest(const std::string& output_path, const nlohmann::json& manifest) {
    std::ofstream out(output_path + ".manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write manifest for " + output_path);
    out << manifest.dump(2) << "\n";
}

void ensure_work_dir(const RunConfig& config) {
    fs::create_directories(config.work_dir);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

TkgStore load_store(const RunConfig& config, LoadReport* report = nullptr) {
    return TkgStore::load(config.tkg_path, tkg_format_from_string(config.tkg_format),
                          config.lenient_load, report);
}

std::optional<SurfaceForms> load_surface_forms(const RunConfig& config) {
    if (!config.surface_forms_path) return std::nullopt;
    return SurfaceForms::load(*config.surface_forms_path);
}

// Render one answer for the per-node JSON fields; null when absent.
nlohmann::json answer_field(const std::optional<Answer>& answer) {
    if (!answer) return nullptr;
    return answer->render_value();
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages

StageResult run_ingest(const RunConfig& config) {
    ensure_work_dir(config);
    LoadReport report;
    TkgStore store = load_store(config, &report);

    const std::string out_path = config.store_snapshot_path();
    {
        std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot write store snapshot: " + out_path);
        for (const auto& fact : store.facts()) {
            nlohmann::json j;
            j["fact_id"] = fact.fact_id;
            j["subject"] = fact.subject;
            j["predicate"] = fact.predicate;
            j["object"] = fact.object;
            if (fact.is_point()) {
                j["time"] = fact.time->render();
            } else {
                j["start"] = fact.start->render();
                j["end"] = fact.end->render();
            }
            out << j.dump() << "\n";
        }
    }

    nlohmann::json manifest = base_manifest("ingest", config);
    manifest["inputs"][config.tkg_path] = file_digest(config.tkg_path);
    manifest["facts"] = report.loaded;
    manifest["duplicates_dropped"] = report.duplicates;
    manifest["malformed_skipped"] = report.malformed;
    manifest["entities"] = store.entities().size();
    manifest["predicates"] = store.predicates().size();
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

StageResult run_index(const RunConfig& config) {
    ensure_work_dir(config);
    TkgStore store = load_store(config);
    auto forms = load_surface_forms(config);
    std::vector<VerbalizedFact> corpus = verbalize_store(store, forms ? &*forms : nullptr);
    auto embedder = make_embedder(config);
    VectorIndex index = VectorIndex::build(corpus, *embedder,
                                           index_backend_from_string(config.index_backend));

    const std::string out_path = config.index_manifest_path();
    nlohmann::json info;
    info["backend"] = config.index_backend;
    info["embedder"] = embedder->backend_id();
    info["dim"] = index.dim();
    info["entries"] = index.size();
    {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write index manifest: " + out_path);
        out << info.dump(2) << "\n";
    }

    nlohmann::json manifest = base_manifest("index", config);
    manifest["inputs"][config.tkg_path] = file_digest(config.tkg_path);
    manifest["entries"] = index.size();
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

StageResult run_decompose(const RunConfig& config) {
    ensure_work_dir(config);
    std::vector<DatasetQuestion> questions = select_questions(config);
    LlmGateway gateway = make_gateway(config);
    FixtureSet recorded;
    if (config.record_fixtures_path) {
        // Recording appends across stages sharing one fixture file.
        if (fs::exists(*config.record_fixtures_path)) {
            recorded = FixtureSet::load(*config.record_fixtures_path);
        }
        gateway.record_to(&recorded);
    }

    DecomposeOptions options;
    options.model_id = config.decompose_model;
    options.temperature = config.temperature;
    options.max_depth = config.max_depth;

    const std::string out_path = config.trees_path();
    std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
    if (!out) throw IoError("cannot write trees file: " + out_path);

    std::size_t fallbacks = 0;
    for (const auto& q : questions) {
        gateway.set_record_note("decompose:" + q.question_id);
        QuestionType qtype = classify_question(q.question, q.qtype_hint);
        nlohmann::json row;
        row["question_id"] = q.question_id;
        row["question"] = q.question;
        row["qtype"] = to_string(qtype.category);
        try {
            DecomposeOutcome outcome = decompose(q.question, qtype, gateway, options);
            if (!q.answers.empty()) {
                outcome.tree.nodes[static_cast<std::size_t>(outcome.tree.root_idx)].gold_answer =
                    q.answers.front();
            }
            row["tree"] = outcome.tree.to_json();
            row["llm_calls"] = outcome.llm_calls;
            row["fallback_leaf_only"] = outcome.fallback_leaf_only;
            if (outcome.fallback_leaf_only) ++fallbacks;
        } catch (const Error& e) {
            // Tree-level failures degrade to a leaf-only tree so the batch
            // keeps moving; the warning is preserved in the row.
            QueryTree leaf = build_tree(standardize_time(q.question),
                                        ParsedDecomposition{q.question, {}}, qtype,
                                        config.max_depth);
            if (!q.answers.empty()) {
                leaf.nodes[static_cast<std::size_t>(leaf.root_idx)].gold_answer =
                    q.answers.front();
            }
            row["tree"] = leaf.to_json();
            row["llm_calls"] = 2;  // both attempts consumed
            row["fallback_leaf_only"] = true;
            row["warning"] = e.what();
            ++fallbacks;
            std::cerr << "warning: decompose " << q.question_id << ": " << e.what() << "\n";
        }
        out << row.dump() << "\n";
    }
    out.close();

    if (config.record_fixtures_path) recorded.save(fs::path(*config.record_fixtures_path));

    nlohmann::json manifest = base_manifest("decompose", config);
    manifest["inputs"][config.dataset_path] = file_digest(config.dataset_path);
    if (config.fixture_path) {
        manifest["inputs"][*config.fixture_path] = file_digest(*config.fixture_path);
    }
    manifest["questions"] = questions.size();
    manifest["fallback_leaf_only"] = fallbacks;
    manifest["llm_calls"] = gateway.call_count();
    manifest["network_calls"] = gateway.network_call_count();
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

namespace {

struct TreeRow {
    std::string question_id;
    std::string question;
    std::string qtype;
    QueryTree tree;
    int decompose_calls = 0;
    bool fallback = false;
};

TreeRow parse_tree_row(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(line_no, std::string("invalid trees row: ") + e.what());
    }
    TreeRow row;
    try {
        row.question_id = j.at("question_id").get<std::string>();
        row.question = j.at("question").get<std::string>();
        row.qtype = j.value("qtype", "equal");
        row.tree = QueryTree::from_json(j.at("tree"));
        row.decompose_calls = j.value("llm_calls", 0);
        row.fallback = j.value("fallback_leaf_only", false);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedLine(line_no, std::string("bad trees row: ") + e.what());
    }
    return row;
}

nlohmann::json solve_row_json(const TreeRow& row, const SolveResult& result,
                              const RunConfig& config) {
    nlohmann::json out;
    out["question_id"] = row.question_id;
    out["question"] = row.tree.root().question_text;
    out["qtype"] = row.qtype;
    out["answer"] = result.final_answer.render_value();
    out["answer_kind"] = to_string(result.final_answer.kind);
    out["predictions"] = result.predictions;
    out["api_calls_decompose"] = row.decompose_calls;
    out["api_calls_solve"] = result.llm_calls;
    out["api_calls"] = row.decompose_calls + result.llm_calls;
    out["depth"] = row.tree.depth();
    out["branch"] = row.tree.branch();

    nlohmann::json tree;
    tree["root_idx"] = row.tree.root_idx;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : row.tree.nodes) {
        nlohmann::json jn;
        jn["idx"] = node.idx;
        jn["question_text"] = node.question_text;
        jn["sons"] = node.sons;
        jn["fa"] = node.fa ? nlohmann::json(*node.fa) : nlohmann::json(nullptr);
        jn["qlabel"] = to_string(node.qlabel.category);
        jn["gold_answer"] =
            node.gold_answer ? nlohmann::json(*node.gold_answer) : nlohmann::json(nullptr);
        auto it = result.traces.find(node.idx);
        if (it != result.traces.end()) {
            const SolveTrace& trace = it->second;
            jn["question"] = trace.question;
            jn["IR_answer"] = answer_field(trace.ir_answer);
            jn["child_answer"] = answer_field(trace.child_answer);
            jn["answer"] = trace.final_answer.render_value();
            jn["facts"] = trace.fact_lines;
            jn["retrieved_fact_ids"] = trace.retrieved_fact_ids;
            jn["llm_calls"] = trace.llm_calls;
            jn["seq"] = trace.completion_seq;
            if (!trace.warnings.empty()) jn["warnings"] = trace.warnings;
            if (config.store_chains) jn["chain"] = trace.final_answer.chain;
        }
        nodes.push_back(std::move(jn));
    }
    tree["nodes"] = std::move(nodes);
    out["tree"] = std::move(tree);
    return out;
}

}  // namespace

StageResult run_solve(const RunConfig& config) {
    ensure_work_dir(config);
    TkgStore store = load_store(config);
    auto forms = load_surface_forms(config);
    std::vector<VerbalizedFact> corpus = verbalize_store(store, forms ? &*forms : nullptr);
    auto embedder = make_embedder(config);
    VectorIndex index = VectorIndex::build(corpus, *embedder,
                                           index_backend_from_string(config.index_backend));
    LlmGateway gateway = make_gateway(config);
    FixtureSet recorded;
    if (config.record_fixtures_path) {
        // Recording appends across stages sharing one fixture file.
        if (fs::exists(*config.record_fixtures_path)) {
            recorded = FixtureSet::load(*config.record_fixtures_path);
        }
        gateway.record_to(&recorded);
    }

    SolveConfig solve_config;
    solve_config.top_k = config.top_k;
    solve_config.max_depth = config.max_depth;
    solve_config.aggregation = aggregation_mode_from_string(config.aggregation_mode);
    solve_config.reason_model = config.reason_model;
    solve_config.aggregate_model = config.aggregate_model;
    solve_config.temperature = config.temperature;

    std::vector<std::string> lines = read_lines(config.trees_path());
    std::vector<TreeRow> rows;
    rows.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        rows.push_back(parse_tree_row(lines[i], i + 1));
    }

    std::vector<nlohmann::json> outputs(rows.size());
    std::vector<std::string> failures;
    std::mutex failures_mutex;

    auto solve_one = [&](std::size_t i) {
        Solver solver(store, corpus, index, *embedder, gateway, solve_config);
        try {
            SolveResult result = solver.solve_tree(rows[i].tree);
            outputs[i] = solve_row_json(rows[i], result, config);
        } catch (const Error& e) {
            SolveResult failed;
            failed.final_answer = Answer::error(e.what());
            outputs[i] = solve_row_json(rows[i], failed, config);
            outputs[i]["error"] = e.what();
            std::lock_guard<std::mutex> lock(failures_mutex);
            failures.push_back(rows[i].question_id + ": " + e.what());
        }
    };

    if (config.parallelism <= 1 || rows.size() <= 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) solve_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= rows.size()) return;
                solve_one(i);
            }
        };
        std::vector<std::thread> pool;
        auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism),
                                               rows.size());
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const std::string out_path = config.solve_path();
    {
        std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot write solve file: " + out_path);
        for (const auto& row : outputs) out << row.dump() << "\n";
    }
    for (const auto& f : failures) std::cerr << "warning: solve " << f << "\n";

    if (config.record_fixtures_path) recorded.save(fs::path(*config.record_fixtures_path));

    nlohmann::json manifest = base_manifest("solve", config);
    manifest["inputs"][config.trees_path()] = file_digest(config.trees_path());
    manifest["inputs"][config.tkg_path] = file_digest(config.tkg_path);
    if (config.fixture_path) {
        manifest["inputs"][*config.fixture_path] = file_digest(*config.fixture_path);
    }
    manifest["questions"] = rows.size();
    manifest["failures"] = failures.size();
    manifest["llm_calls"] = gateway.call_count();
    manifest["network_calls"] = gateway.network_call_count();
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

StageResult run_eval(const RunConfig& config) {
    ensure_work_dir(config);
    std::vector<DatasetQuestion> questions = load_dataset(config.dataset_path);
    std::map<std::string, const DatasetQuestion*> by_id;
    for (const auto& q : questions) by_id[q.question_id] = &q;

    std::vector<std::string> lines = read_lines(config.solve_path());
    std::vector<EvalRecord> records;
    nlohmann::json record_rows = nlohmann::json::array();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedLine(i + 1, std::string("invalid solve row: ") + e.what());
        }
        EvalRecord record;
        record.question_id = j.at("question_id").get<std::string>();
        auto found = by_id.find(record.question_id);
        if (found == by_id.end()) {
            std::cerr << "warning: solve row " << record.question_id
                      << " missing from dataset; skipped\n";
            continue;
        }
        const DatasetQuestion& q = *found->second;
        record.qtype = classify_question(q.question, q.qtype_hint);
        record.answer_type = q.answer_type;
        record.time_granularity = q.time_granularity;
        record.gold = q.answers;
        for (const auto& p : j.value("predictions", std::vector<std::string>{})) {
            record.predictions.push_back(parse_answer_text(p));
        }
        record.api_calls = j.value("api_calls", 0);
        record.tree_depth = j.value("depth", 0);
        record.tree_branch = j.value("branch", 0.0);
        score_record(record);
        records.push_back(record);

        nlohmann::json row;
        row["question_id"] = record.question_id;
        row["hit1"] = record.hit1;
        row["hit10"] = record.hit10;
        row["gold"] = record.gold;
        row["prediction"] =
            record.predictions.empty() ? "" : record.predictions.front().render_value();
        record_rows.push_back(std::move(row));
    }

    EvalSummary summary = summarize_records(records);  // throws EmptyRecordSet when empty

    nlohmann::json out_json;
    out_json["summary"] = summary_to_json(summary);
    out_json["records"] = std::move(record_rows);
    const std::string out_path = config.eval_json_path();
    {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write eval output: " + out_path);
        out << out_json.dump(2) << "\n";
    }
    {
        std::ofstream out(config.eval_text_path(), std::ios::trunc);
        if (!out) throw IoError("cannot write eval tables: " + config.eval_text_path());
        out << render_summary_tables(summary);
    }

    nlohmann::json manifest = base_manifest("eval", config);
    manifest["inputs"][config.solve_path()] = file_digest(config.solve_path());
    manifest["inputs"][config.dataset_path] = file_digest(config.dataset_path);
    manifest["records"] = records.size();
    manifest["hits1"] = summary.overall.hits1;
    manifest["hits10"] = summary.overall.hits10;
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

StageResult run_stats(const RunConfig& config) {
    ensure_work_dir(config);
    std::vector<std::string> lines = read_lines(config.solve_path());
    if (lines.empty()) throw EmptyRecordSet("tree statistics over solve output");

    std::vector<TreeStatsInput> trees;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedLine(i + 1, std::string("invalid solve row: ") + e.what());
        }
        trees.push_back(TreeStatsInput{j.value("depth", 0), j.value("branch", 0.0),
                                       j.value("api_calls", 0)});
    }
    TreeStats stats = tree_stats(trees);

    // Retrieval quality curve, when the dataset annotates gold facts.
    std::vector<int> ns = {10, 20, 30, 40, 50, 60};
    std::vector<std::vector<RetrievalResult>> retrieved;
    std::vector<std::set<std::int64_t>> golds;
    bool any_gold = false;
    std::vector<DatasetQuestion> questions = select_questions(config);
    for (const auto& q : questions) {
        if (!q.gold_fact_ids.empty()) any_gold = true;
    }
    std::vector<RecallCurvePoint> curve;
    if (any_gold) {
        TkgStore store = load_store(config);
        auto forms = load_surface_forms(config);
        std::vector<VerbalizedFact> corpus = verbalize_store(store, forms ? &*forms : nullptr);
        auto embedder = make_embedder(config);
        VectorIndex index = VectorIndex::build(
            corpus, *embedder, index_backend_from_string(config.index_backend));
        int max_n = *std::max_element(ns.begin(), ns.end());
        for (const auto& q : questions) {
            retrieved.push_back(retrieve(standardize_time(q.question), index, *embedder, max_n));
            golds.push_back(q.gold_fact_ids);
        }
        curve = recall_curve(retrieved, golds, ns);
    }

    nlohmann::json out_json;
    out_json["avg_depth"] = stats.avg_depth;
    out_json["avg_branch"] = stats.avg_branch;
    out_json["avg_api_calls"] = stats.avg_api_calls;
    out_json["questions"] = trees.size();
    if (!curve.empty()) {
        nlohmann::json jcurve = nlohmann::json::array();
        for (const auto& p : curve) {
            jcurve.push_back(nlohmann::json{{"n", p.n},
                                            {"recall", p.mean_recall},
                                            {"questions", p.questions},
                                            {"excluded", p.excluded}});
        }
        out_json["recall_curve"] = std::move(jcurve);
    }
    const std::string out_path = config.stats_json_path();
    {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw IoError("cannot write stats output: " + out_path);
        out << out_json.dump(2) << "\n";
    }
    {
        std::ofstream out(config.stats_text_path(), std::ios::trunc);
        if (!out) throw IoError("cannot write stats tables: " + config.stats_text_path());
        out << "Avg Depth     " << stats.avg_depth << "\n"
            << "Avg Branch    " << stats.avg_branch << "\n"
            << "Avg API Call  " << stats.avg_api_calls << "\n";
        if (!curve.empty()) out << "\n" << render_recall_table(curve);
    }

    nlohmann::json manifest = base_manifest("stats", config);
    manifest["inputs"][config.solve_path()] = file_digest(config.solve_path());
    manifest["questions"] = trees.size();
    write_manifest(out_path, manifest);
    return StageResult{out_path, manifest};
}

}  // namespace chronoqa
