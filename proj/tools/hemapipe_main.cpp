#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hema/pipeline.hpp"
#include "hema/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blood-smear classification pipeline: prepare, segment, train, evaluate, report"};
    app.set_version_flag("--version", hema::tool_id());
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> model_dir;
    bool verbose = false;

    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out-dir", out_dir, "override the config output directory");
    app.add_flag("--verbose", verbose, "per-sample progress output");

    const char* commands[] = {"prepare", "segment", "train", "evaluate", "report"};
    const char* descriptions[] = {
        "ingest, validate, merge and split the datasets",
        "HSV-mask every image and write the segmented tree",
        "fine-tune the configured backend on the train split",
        "predict a split and write metrics and confusion matrices",
        "emit training curves and the comparison table",
    };
    for (int i = 0; i < 5; ++i) {
        auto* sub = app.add_subcommand(commands[i], descriptions[i]);
        sub->add_option("--config", config_path, "pipeline config file")->required();
        if (std::string(commands[i]) == "evaluate") {
            sub->add_option("--model", model_dir, "trained model directory");
        }
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    hema::PipelineConfig config;
    try {
        config = hema::load_pipeline_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 1;
    }

    hema::CommandOverrides overrides;
    overrides.seed = seed;
    if (out_dir) overrides.out_dir = *out_dir;
    if (model_dir) overrides.model_dir = *model_dir;
    overrides.verbose = verbose;
    return hema::run_command(command, std::move(config), overrides);
}
