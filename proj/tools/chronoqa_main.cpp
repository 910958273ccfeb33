// chronoqa: batch front-end for the temporal KGQA pipeline. Each subcommand
// reads the shared config file, consumes the previous stage's output and
// writes its own checkpoint plus a manifest.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chronoqa/errors.hpp"
#include "chronoqa/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> llm_mode;
    std::optional<int> top_k;
    std::optional<int> limit;
    std::optional<unsigned> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--llm-mode", args.llm_mode, "Override llm_mode: scripted|cached|live");
    cmd->add_option("--top-k", args.top_k, "Override retrieval context size");
    cmd->add_option("--limit", args.limit, "Use only the first n questions");
    cmd->add_option("--seed", args.seed, "Sample questions with this RNG seed instead");
}

chronoqa::RunConfig make_config(const CommonArgs& args) {
    chronoqa::RunConfig config = chronoqa::RunConfig::from_file(args.config_path);
    if (args.llm_mode) config.llm_mode = *args.llm_mode;
    if (args.top_k) config.top_k = *args.top_k;
    if (args.limit) config.limit = *args.limit;
    if (args.seed) config.seed = *args.seed;
    config.validate();
    return config;
}

int report_error(const char* stage, const std::exception& e) {
    nlohmann::json err{{"error", {{"stage", stage}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal knowledge graph question answering pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    using Runner = chronoqa::StageResult (*)(const chronoqa::RunConfig&);
    struct Stage {
        const char* name;
        const char* help;
        Runner run;
    };
    const Stage stages[] = {
        {"ingest", "Load and normalize the TKG; write the store snapshot",
         chronoqa::run_ingest},
        {"index", "Embed the verbalized facts and report index statistics",
         chronoqa::run_index},
        {"decompose", "Build the sub-question tree for every dataset question",
         chronoqa::run_decompose},
        {"solve", "Resolve every question tree bottom-up against the fact index",
         chronoqa::run_solve},
        {"eval", "Score solve output: Hits@k with per-category breakdowns",
         chronoqa::run_eval},
        {"stats", "Tree/API statistics and the retrieval recall curve",
         chronoqa::run_stats},
    };

    for (const Stage& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
        add_common(cmd, args);
        cmd->callback([&args, &stage] {
            chronoqa::RunConfig config = make_config(args);
            chronoqa::StageResult result = stage.run(config);
            std::cout << result.output_path << "\n";
        });
    }

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const chronoqa::Error& e) {
        return report_error(app.get_subcommands().empty()
                                ? "cli"
                                : app.get_subcommands().front()->get_name().c_str(),
                            e);
    } catch (const std::exception& e) {
        return report_error("cli", e);
    }
    return 0;
}
