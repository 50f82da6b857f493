#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcic/config.hpp"
#include "pcic/pipeline.hpp"

namespace {

std::string config_key_help() {
    std::string out = "Config keys (override with --config FILE or --set key=value):\n";
    for (const auto& info : pcic::Config::registry()) {
        out += "  ";
        out += info.key;
        out += " (default: ";
        out += info.default_value[0] == '\0' ? "empty" : info.default_value;
        out += ")\n      ";
        out += info.doc;
        out += "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repurchase recommender: survival and forecast features rank categories, "
                 "recency and frequency rank items inside them."};
    app.footer(config_key_help());
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string workdir;
    std::string input;
    std::int64_t seed = -1;
    int label_window_days = -1;
    int threads = -1;
    int top_k = -1;
    int folds = -1;

    app.add_option("--config", config_path, "config file of `key = value` lines")
        ->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one config key, as key=value (repeatable)");
    app.add_option("--workdir", workdir, "shorthand for paths.workdir");
    app.add_option("--input", input, "shorthand for paths.input");
    app.add_option("--seed", seed, "shorthand for seed");
    app.add_option("--label-window-days", label_window_days,
                   "shorthand for split.label_window_days");
    app.add_option("--threads", threads, "shorthand for threads");
    app.add_option("--top-k", top_k, "shorthand for recommend.top_k and eval.top_k");
    app.add_option("--folds", folds, "shorthand for eval.folds");

    const struct {
        const char* name;
        const char* doc;
    } stages[] = {
        {"synth", "generate a synthetic transaction log plus its ground-truth gaps"},
        {"ingest", "parse and canonicalize the input transaction CSV"},
        {"split", "carve the corpus into feature and label periods"},
        {"featurize", "build life tables and the per-(user, category) feature matrix"},
        {"train", "train the category ranking model with early stopping"},
        {"score", "rank each user's categories with the trained model"},
        {"recommend", "merge category and item ranks, filter, and emit the top list"},
        {"evaluate", "cross-validate against popularity and frequency baselines"},
        {"importance", "permutation importance of each model feature"},
    };
    for (const auto& stage : stages) {
        app.add_subcommand(stage.name, stage.doc)->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        pcic::Config config;
        if (!config_path.empty()) config.apply_file(config_path);
        if (!workdir.empty()) config.set("paths.workdir", workdir);
        if (!input.empty()) config.set("paths.input", input);
        if (seed >= 0) config.set("seed", std::to_string(seed));
        if (label_window_days >= 0) {
            config.set("split.label_window_days", std::to_string(label_window_days));
        }
        if (threads >= 0) config.set("threads", std::to_string(threads));
        if (top_k >= 0) {
            config.set("recommend.top_k", std::to_string(top_k));
            config.set("eval.top_k", std::to_string(top_k));
        }
        if (folds >= 0) config.set("eval.folds", std::to_string(folds));
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw pcic::ConfigError("--set expects key=value, got `" + kv + "`");
            }
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }

        const std::string stage = app.get_subcommands().front()->get_name();
        const pcic::StageResult result = pcic::run_stage(stage, config);
        std::cout << "stage " << result.stage << " complete\n";
        for (const auto& path : result.outputs) std::cout << "  wrote " << path << "\n";
        for (const auto& [key, value] : result.stats) {
            std::cout << "  " << key << " = " << value << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
