#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcic/config.hpp"
#include "pcic/pipeline.hpp"

using namespace pcic;
namespace fs = std::filesystem;

namespace {

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& tag) {
        path = fs::temp_directory_path() / ("pcic_pipe_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

Config tiny_world(const Workdir& dir) {
    Config config;
    config.set("paths.workdir", dir.str());
    config.set("synth.n_users", "50");
    config.set("synth.n_categories", "6");
    config.set("synth.items_per_category", "5");
    config.set("synth.horizon_days", "240");
    config.set("train.max_epochs", "10");
    config.set("eval.folds", "3");
    config.set("eval.min_users", "25");
    config.set("importance.repeats", "2");
    return config;
}

}  // namespace

TEST_CASE("stage names are fixed and unknown stages are rejected") {
    const auto& names = stage_names();
    REQUIRE(names.size() == 9);
    CHECK(names.front() == "synth");
    CHECK(names.back() == "importance");
    CHECK_THROWS_AS(run_stage("deploy", Config{}), PipelineError);
}

TEST_CASE("stages refuse to run before their producers") {
    const Workdir dir("order");
    auto config = tiny_world(dir);

    // ingest without an input file.
    CHECK_THROWS_AS(run_stage("ingest", config), PipelineError);

    // Everything downstream names the stage that must run first.
    for (const auto& [stage, producer] :
         std::vector<std::pair<std::string, std::string>>{{"split", "ingest"},
                                                          {"featurize", "split"},
                                                          {"train", "featurize"},
                                                          {"score", "train"},
                                                          {"recommend", "score"},
                                                          {"importance", "train"}}) {
        try {
            run_stage(stage, config);
            FAIL("expected PipelineError for stage " << stage);
        } catch (const PipelineError& e) {
            CHECK(std::string(e.what()).find(producer) != std::string::npos);
        }
    }
}

TEST_CASE("the full stage chain runs on a synthetic world") {
    const Workdir dir("chain");
    auto config = tiny_world(dir);

    const auto synth = run_stage("synth", config);
    CHECK(fs::exists(dir.path / "synthetic.csv"));
    CHECK(fs::exists(dir.path / "synth_truth.csv"));
    CHECK(fs::exists(dir.path / "synth.manifest"));

    config.set("paths.input", (dir.path / "synthetic.csv").string());
    const auto ingest = run_stage("ingest", config);
    CHECK(fs::exists(dir.path / "transactions.csv"));
    CHECK(ingest.stats.count("records") == 1);

    const auto split = run_stage("split", config);
    CHECK(fs::exists(dir.path / "features.csv"));
    CHECK(fs::exists(dir.path / "labels.csv"));
    CHECK(fs::exists(dir.path / "references.csv"));
    CHECK(split.stats.count("split_date") == 1);

    // The manifest is a loadable config carrying the stage's stats.
    const auto manifest = Config::from_file((dir.path / "split.manifest").string());
    CHECK(manifest.get_string("stats.split_date") == split.stats.at("split_date"));
    CHECK(manifest.get_int("synth.n_users") == 50);

    run_stage("featurize", config);
    CHECK(fs::exists(dir.path / "lifetables.csv"));
    CHECK(fs::exists(dir.path / "feature_matrix.csv"));

    const auto train = run_stage("train", config);
    CHECK(fs::exists(dir.path / "model.txt"));
    CHECK(train.stats.count("pos_weight") == 1);
    CHECK(std::stoi(train.stats.at("val_rows")) > 0);

    run_stage("score", config);
    CHECK(fs::exists(dir.path / "category_scores.csv"));
    {
        std::ifstream scores(dir.path / "category_scores.csv");
        std::string header;
        std::getline(scores, header);
        CHECK(header == "user_id,rank,category_id,score");
    }

    const auto recommend = run_stage("recommend", config);
    CHECK(fs::exists(dir.path / "recommendations.csv"));
    CHECK(std::stoi(recommend.stats.at("recommendations")) > 0);

    const auto evaluate = run_stage("evaluate", config);
    CHECK(fs::exists(dir.path / "eval_report.txt"));
    CHECK(evaluate.stats.count("metric.pcic.ndcg.mean") == 1);

    const auto importance = run_stage("importance", config);
    CHECK(fs::exists(dir.path / "importance.csv"));
    CHECK(importance.stats.count("base_loss") == 1);
    {
        std::ifstream imp(dir.path / "importance.csv");
        std::string header;
        std::getline(imp, header);
        CHECK(header == "feature,mean_increase,repeat_1,repeat_2");
        std::size_t rows = 0;
        std::string line;
        while (std::getline(imp, line)) {
            if (!line.empty()) ++rows;
        }
        CHECK(rows == 11);  // one per feature
    }

    CHECK(synth.stage == "synth");
}

TEST_CASE("jsonl recommendation output is selectable") {
    const Workdir dir("jsonl");
    auto config = tiny_world(dir);
    run_stage("synth", config);
    config.set("paths.input", (dir.path / "synthetic.csv").string());
    run_stage("ingest", config);
    run_stage("split", config);
    run_stage("featurize", config);
    run_stage("train", config);
    run_stage("score", config);
    config.set("recommend.format", "jsonl");
    run_stage("recommend", config);
    CHECK(fs::exists(dir.path / "recommendations.jsonl"));
    std::ifstream in(dir.path / "recommendations.jsonl");
    std::string line;
    REQUIRE(static_cast<bool>(std::getline(in, line)));
    CHECK(line.front() == '{');
    CHECK(line.find("\"rk_pc\"") != std::string::npos);
}

TEST_CASE("score rejects a model trained on a different schema") {
    const Workdir dir("schema");
    auto config = tiny_world(dir);
    run_stage("synth", config);
    config.set("paths.input", (dir.path / "synthetic.csv").string());
    run_stage("ingest", config);
    run_stage("split", config);
    run_stage("featurize", config);
    run_stage("train", config);

    // Corrupt the stored schema line.
    const auto model_path = dir.path / "model.txt";
    std::ifstream in(model_path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    in.close();
    const auto pos = content.find("pc-features-v1");
    REQUIRE(pos != std::string::npos);
    content.replace(pos, 14, "pc-features-v9");
    std::ofstream out(model_path);
    out << content;
    out.close();

    CHECK_THROWS(run_stage("score", config));
}
