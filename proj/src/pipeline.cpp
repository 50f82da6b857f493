#include "pcic/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "pcic/baselines.hpp"
#include "pcic/crossval.hpp"
#include "pcic/csv.hpp"
#include "pcic/dates.hpp"
#include "pcic/features.hpp"
#include "pcic/icrank.hpp"
#include "pcic/metrics.hpp"
#include "pcic/mlp.hpp"
#include "pcic/recommend.hpp"
#include "pcic/split.hpp"
#include "pcic/survival.hpp"
#include "pcic/synth.hpp"
#include "pcic/transactions.hpp"
#include "pcic/util.hpp"

namespace fs = std::filesystem;

namespace pcic {

namespace {

std::string artifact(const Config& config, const std::string& name) {
    return (fs::path(config.get_string("paths.workdir")) / name).string();
}

Date parse_date_or_throw(const std::string& text, const std::string& where) {
    const auto date = parse_date(text);
    if (!date) throw PipelineError("bad date `" + text + "` in " + where);
    return *date;
}

void require_artifact(const Config& config, const std::string& name,
                      const std::string& producer, const std::string& stage) {
    if (!fs::exists(artifact(config, name))) {
        throw PipelineError(stage + " requires " + artifact(config, name) + "; run the `" +
                            producer + "` stage first");
    }
}

CsvFormat csv_format(const Config& config) {
    CsvFormat fmt;
    fmt.user = config.get_string("col.user");
    fmt.order = config.get_string("col.order");
    fmt.date = config.get_string("col.date");
    fmt.item = config.get_string("col.item");
    fmt.category = config.get_string("col.category");
    fmt.quantity = config.get_string("col.quantity");
    return fmt;
}

SplitConfig split_config(const Config& config) {
    SplitConfig sc;
    sc.label_window_days = static_cast<int>(config.get_int("split.label_window_days"));
    sc.history_days = static_cast<int>(config.get_int("split.history_days"));
    sc.engaged_only = config.get_bool("split.engaged_only");
    sc.engaged_category_threshold =
        static_cast<int>(config.get_int("split.engaged_category_threshold"));
    return sc;
}

FeatureConfig feature_config(const Config& config) {
    FeatureConfig fc;
    fc.arima_feature_cap = config.get_double("features.arima_cap");
    return fc;
}

TrainConfig train_config(const Config& config) {
    TrainConfig tc;
    tc.optimizer = config.get_string("train.optimizer");
    tc.learning_rate = config.get_double("train.learning_rate");
    tc.batch_size = static_cast<int>(config.get_int("train.batch_size"));
    tc.max_epochs = static_cast<int>(config.get_int("train.max_epochs"));
    tc.patience = static_cast<int>(config.get_int("train.patience"));
    tc.pos_weight = config.get_double("train.pos_weight");
    tc.seed = static_cast<std::uint64_t>(config.get_int("seed"));
    return tc;
}

IcConfig ic_config(const Config& config) {
    IcConfig ic;
    ic.alpha = config.get_double("ic.alpha");
    ic.beta = config.get_double("ic.beta");
    ic.use_nib = config.get_bool("ic.use_nib");
    return ic;
}

MergeOrder merge_order(const Config& config) {
    const std::string value = config.get_string("recommend.merge_order");
    if (value == "ic_major") return MergeOrder::kIcMajor;
    if (value == "pc_major") return MergeOrder::kPcMajor;
    throw PipelineError("recommend.merge_order must be ic_major or pc_major, got `" + value +
                        "`");
}

std::vector<TransactionRecord> records_from_histories(std::span<const UserHistory> histories) {
    std::vector<TransactionRecord> records;
    for (const auto& user : histories) {
        for (const auto& basket : user.baskets) {
            for (const auto& item : basket.items) {
                TransactionRecord rec;
                rec.user_id = user.user_id;
                rec.order_id = basket.order_id;
                rec.order_date = basket.date;
                rec.item_id = item.item_id;
                rec.category_id = item.category_id;
                rec.quantity = item.quantity;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

void write_references(const std::string& path, const SplitResult& split) {
    std::ofstream out(path);
    if (!out) throw PipelineError("cannot write " + path);
    out << "user_id,reference_date\n";
    for (const auto& user : split.feature_histories) {
        out << csv_escape(user.user_id) << ',' << format_date(split.reference_date(user.user_id))
            << '\n';
    }
}

std::unordered_map<std::string, Date> read_references(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot open " + path);
    std::string line;
    if (!read_csv_line(in, line, true) || line != "user_id,reference_date") {
        throw PipelineError("unexpected header in " + path);
    }
    std::unordered_map<std::string, Date> refs;
    while (read_csv_line(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw PipelineError("malformed row in " + path);
        refs[fields[0]] = parse_date_or_throw(fields[1], path);
    }
    return refs;
}

// Rebuilds the split the featurize and recommend stages work from.
SplitResult load_split(const Config& config, const std::string& stage) {
    require_artifact(config, "features.csv", "split", stage);
    require_artifact(config, "labels.csv", "split", stage);
    require_artifact(config, "references.csv", "split", stage);
    require_artifact(config, "split.manifest", "split", stage);

    SplitResult split;
    const auto feature_records = parse_transactions(artifact(config, "features.csv"));
    split.feature_histories = build_histories(feature_records);
    const auto label_records = parse_transactions(artifact(config, "labels.csv"));
    auto label_users = build_histories(label_records);
    std::map<std::string, UserHistory*> label_by_user;
    for (auto& user : label_users) label_by_user[user.user_id] = &user;
    split.label_histories.resize(split.feature_histories.size());
    for (std::size_t i = 0; i < split.feature_histories.size(); ++i) {
        split.label_histories[i].user_id = split.feature_histories[i].user_id;
        auto it = label_by_user.find(split.feature_histories[i].user_id);
        if (it != label_by_user.end()) split.label_histories[i].baskets = std::move(it->second->baskets);
    }
    split.user_reference = read_references(artifact(config, "references.csv"));
    const Config manifest = Config::from_file(artifact(config, "split.manifest"));
    split.split_date =
        parse_date_or_throw(manifest.get_string("stats.split_date"), "split.manifest");
    split.max_date = parse_date_or_throw(manifest.get_string("stats.max_date"), "split.manifest");
    return split;
}

struct CategoryScoreRows {
    std::map<std::string, std::vector<PcScore>> by_user;
    std::vector<std::string> user_order;
};

CategoryScoreRows read_category_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PipelineError("cannot open " + path);
    std::string line;
    if (!read_csv_line(in, line, true) || line != "user_id,rank,category_id,score") {
        throw PipelineError("unexpected header in " + path);
    }
    CategoryScoreRows rows;
    while (read_csv_line(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) throw PipelineError("malformed row in " + path);
        PcScore score;
        score.user_id = fields[0];
        std::int64_t rank = 0;
        if (!parse_int64(fields[1], rank) || !parse_double(fields[3], score.score)) {
            throw PipelineError("malformed row in " + path);
        }
        score.rank = static_cast<int>(rank);
        score.category_id = fields[2];
        if (rows.by_user.find(score.user_id) == rows.by_user.end()) {
            rows.user_order.push_back(score.user_id);
        }
        rows.by_user[score.user_id].push_back(std::move(score));
    }
    for (auto& [user, scores] : rows.by_user) {
        std::sort(scores.begin(), scores.end(),
                  [](const PcScore& a, const PcScore& b) { return a.rank < b.rank; });
    }
    return rows;
}

StageResult run_synth(const Config& config) {
    SynthConfig sc;
    sc.n_users = static_cast<int>(config.get_int("synth.n_users"));
    sc.n_categories = static_cast<int>(config.get_int("synth.n_categories"));
    sc.items_per_category = static_cast<int>(config.get_int("synth.items_per_category"));
    sc.horizon_days = static_cast<int>(config.get_int("synth.horizon_days"));
    sc.category_affinity = config.get_double("synth.category_affinity");
    sc.gap_shape = config.get_double("synth.gap_shape");
    sc.gap_scale = config.get_double("synth.gap_scale");
    sc.min_mean_gap = config.get_double("synth.min_mean_gap");
    sc.renewal_shape = config.get_double("synth.renewal_shape");
    sc.zipf_exponent = config.get_double("synth.zipf_exponent");
    sc.quantity_mean = config.get_double("synth.quantity_mean");
    sc.start_date = config.get_string("synth.start_date");
    sc.seed = static_cast<std::uint64_t>(config.get_int("seed"));

    const SynthResult result = generate_synthetic(sc);
    const std::string input = config.get_string("paths.input");
    const std::string out_path = input.empty() ? artifact(config, "synthetic.csv") : input;
    write_transactions(out_path, result.records);
    write_truth_csv(artifact(config, "synth_truth.csv"), result.truth_mean_gaps);

    std::set<std::string> users;
    for (const auto& rec : result.records) users.insert(rec.user_id);
    StageResult stage{"synth", {out_path, artifact(config, "synth_truth.csv")}, {}};
    stage.stats["records"] = std::to_string(result.records.size());
    stage.stats["active_pairs"] = std::to_string(result.truth_mean_gaps.size());
    stage.stats["users"] = std::to_string(users.size());
    return stage;
}

StageResult run_ingest(const Config& config) {
    const std::string input = config.get_string("paths.input");
    if (input.empty()) throw PipelineError("ingest requires paths.input to be set");
    if (!fs::exists(input)) throw PipelineError("ingest input does not exist: " + input);
    ParseStats parse_stats;
    const auto records = parse_transactions(input, csv_format(config), &parse_stats);
    write_transactions(artifact(config, "transactions.csv"), records);

    StageResult stage{"ingest", {artifact(config, "transactions.csv")}, {}};
    stage.stats["rows_read"] = std::to_string(parse_stats.rows_read);
    stage.stats["rows_rejected"] = std::to_string(parse_stats.rows_rejected);
    stage.stats["rows_merged"] = std::to_string(parse_stats.rows_merged);
    stage.stats["records"] = std::to_string(records.size());
    stage.stats["users"] = std::to_string(build_histories(records).size());
    return stage;
}

StageResult run_split(const Config& config) {
    require_artifact(config, "transactions.csv", "ingest", "split");
    const auto records = parse_transactions(artifact(config, "transactions.csv"));
    const auto histories = build_histories(records);
    const std::string protocol = config.get_string("eval.protocol");
    SplitResult split;
    if (protocol == "label_window") {
        split = temporal_split(histories, split_config(config));
    } else if (protocol == "last_basket") {
        split = last_basket_split(histories, split_config(config));
    } else {
        throw PipelineError("eval.protocol must be label_window or last_basket, got `" +
                            protocol + "`");
    }
    write_transactions(artifact(config, "features.csv"),
                       records_from_histories(split.feature_histories));
    write_transactions(artifact(config, "labels.csv"),
                       records_from_histories(split.label_histories));
    write_references(artifact(config, "references.csv"), split);

    std::size_t label_baskets = 0;
    for (const auto& user : split.label_histories) label_baskets += user.baskets.size();
    StageResult stage{"split",
                      {artifact(config, "features.csv"), artifact(config, "labels.csv"),
                       artifact(config, "references.csv")},
                      {}};
    stage.stats["split_date"] = format_date(split.split_date);
    stage.stats["max_date"] = format_date(split.max_date);
    stage.stats["users"] = std::to_string(split.feature_histories.size());
    stage.stats["label_baskets"] = std::to_string(label_baskets);
    return stage;
}

StageResult run_featurize(const Config& config) {
    const SplitResult split = load_split(config, "featurize");
    const auto tables = build_all_life_tables(split);
    write_life_tables_csv(artifact(config, "lifetables.csv"), tables);
    std::map<std::string, SurvivalCurves> curves;
    const auto min_obs = config.get_int("survival.min_observations");
    for (const auto& [category_id, table] : tables) {
        curves[category_id] = compute_curves(table, min_obs);
    }
    const auto fallbacks = compute_arima_fallbacks(split.feature_histories);
    const LabelSet labels = build_labels(split);
    const auto rows =
        assemble_feature_matrix(split, curves, labels, fallbacks, feature_config(config),
                                static_cast<int>(config.get_int("threads")));
    write_feature_matrix(artifact(config, "feature_matrix.csv"), rows);

    std::size_t positives = 0;
    for (const auto& row : rows) positives += row.label == 1 ? 1u : 0u;
    StageResult stage{
        "featurize",
        {artifact(config, "lifetables.csv"), artifact(config, "feature_matrix.csv")},
        {}};
    stage.stats["rows"] = std::to_string(rows.size());
    stage.stats["positives"] = std::to_string(positives);
    stage.stats["categories"] = std::to_string(tables.size());
    return stage;
}

StageResult run_train(const Config& config) {
    require_artifact(config, "feature_matrix.csv", "featurize", "train");
    const auto rows = read_feature_matrix(artifact(config, "feature_matrix.csv"));
    std::vector<std::string> users;
    for (const auto& row : rows) {
        if (users.empty() || users.back() != row.user_id) users.push_back(row.user_id);
    }
    const auto order =
        seeded_user_order(users, static_cast<std::uint64_t>(config.get_int("seed")));
    const std::size_t n_val = users.size() / 10;
    std::set<std::string> val_users;
    for (std::size_t pos = 0; pos < n_val; ++pos) val_users.insert(users[order[pos]]);
    std::vector<FeatureRow> train_rows;
    std::vector<FeatureRow> val_rows;
    for (const auto& row : rows) {
        (val_users.count(row.user_id) != 0 ? val_rows : train_rows).push_back(row);
    }

    const TrainResult result = train_pc_model(train_rows, val_rows, train_config(config));
    write_pc_model(artifact(config, "model.txt"), result.model);

    StageResult stage{"train", {artifact(config, "model.txt")}, {}};
    stage.stats["train_rows"] = std::to_string(train_rows.size());
    stage.stats["val_rows"] = std::to_string(val_rows.size());
    stage.stats["epochs"] = std::to_string(result.epochs_run);
    stage.stats["best_epoch"] = std::to_string(result.best_epoch);
    stage.stats["pos_weight"] = format_double(result.model.pos_weight);
    if (!result.val_loss.empty()) {
        stage.stats["best_val_loss"] =
            format_double(result.val_loss[static_cast<std::size_t>(result.best_epoch - 1)]);
    }
    return stage;
}

StageResult run_score(const Config& config) {
    require_artifact(config, "model.txt", "train", "score");
    require_artifact(config, "feature_matrix.csv", "featurize", "score");
    const PcModel model = read_pc_model(artifact(config, "model.txt"));
    const auto rows = read_feature_matrix(artifact(config, "feature_matrix.csv"));
    const auto scores = score_categories(model, rows);

    const std::string path = artifact(config, "category_scores.csv");
    std::ofstream out(path);
    if (!out) throw PipelineError("cannot write " + path);
    out << "user_id,rank,category_id,score\n";
    for (const auto& score : scores) {
        out << csv_escape(score.user_id) << ',' << score.rank << ','
            << csv_escape(score.category_id) << ',' << format_double(score.score) << '\n';
    }

    StageResult stage{"score", {path}, {}};
    stage.stats["rows"] = std::to_string(scores.size());
    return stage;
}

StageResult run_recommend(const Config& config) {
    require_artifact(config, "category_scores.csv", "score", "recommend");
    const SplitResult split = load_split(config, "recommend");
    const auto scores = read_category_scores(artifact(config, "category_scores.csv"));

    const IcConfig ic = ic_config(config);
    const MergeOrder order = merge_order(config);
    FilterConfig filter;
    filter.min_item_purchases = static_cast<int>(config.get_int("filter.min_item_purchases"));
    filter.lookback_months = static_cast<int>(config.get_int("filter.lookback_months"));
    filter.repurchase_threshold = config.get_double("filter.repurchase_threshold");
    for (const auto& category : config.get_list("filter.excluded_categories")) {
        filter.excluded_categories.insert(category);
    }
    const FilterStats filter_stats = compute_filter_stats(
        split.feature_histories, split.split_date, filter.lookback_months);

    std::vector<Recommendation> all;
    for (const auto& user : split.feature_histories) {
        auto it = scores.by_user.find(user.user_id);
        if (it == scores.by_user.end()) continue;
        std::map<std::string, std::vector<RankedItem>> ranked;
        for (const auto& [category_id, items] :
             compute_item_stats(user, split.reference_date(user.user_id))) {
            ranked[category_id] = rank_items_in_category(items, ic);
        }
        auto merged = merge_pc_ic(user.user_id, it->second, ranked, order);
        merged = apply_filters(std::move(merged), filter_stats, filter);
        merged = top_k(std::move(merged), static_cast<int>(config.get_int("recommend.top_k")));
        all.insert(all.end(), std::make_move_iterator(merged.begin()),
                   std::make_move_iterator(merged.end()));
    }

    const std::string format = config.get_string("recommend.format");
    std::string path;
    if (format == "csv") {
        path = artifact(config, "recommendations.csv");
        write_recommendations_csv(path, all);
    } else if (format == "jsonl") {
        path = artifact(config, "recommendations.jsonl");
        write_recommendations_jsonl(path, all);
    } else {
        throw PipelineError("recommend.format must be csv or jsonl, got `" + format + "`");
    }

    std::set<std::string> users;
    for (const auto& rec : all) users.insert(rec.user_id);
    StageResult stage{"recommend", {path}, {}};
    stage.stats["recommendations"] = std::to_string(all.size());
    stage.stats["users"] = std::to_string(users.size());
    return stage;
}

StageResult run_evaluate(const Config& config) {
    require_artifact(config, "transactions.csv", "ingest", "evaluate");
    const auto records = parse_transactions(artifact(config, "transactions.csv"));
    const auto histories = build_histories(records);

    CrossvalConfig cc;
    cc.folds = static_cast<int>(config.get_int("eval.folds"));
    cc.top_k = static_cast<int>(config.get_int("eval.top_k"));
    cc.seed = static_cast<std::uint64_t>(config.get_int("seed"));
    cc.protocol = config.get_string("eval.protocol");
    cc.min_users = static_cast<int>(config.get_int("eval.min_users"));
    cc.threads = static_cast<int>(config.get_int("threads"));
    cc.tune_ic = config.get_bool("eval.tune_ic");
    cc.split = split_config(config);
    cc.features = feature_config(config);
    cc.train = train_config(config);
    cc.ic = ic_config(config);
    cc.merge_order = merge_order(config);

    const CrossvalReport report = run_crossval(histories, cc);
    write_crossval_report(artifact(config, "eval_report.txt"), report);

    StageResult stage{"evaluate", {artifact(config, "eval_report.txt")}, {}};
    stage.stats["users"] = std::to_string(report.n_users);
    stage.stats["folds"] = std::to_string(report.folds.size());
    for (const auto& [key, summary] : report.summary) {
        stage.stats["metric." + key + ".mean"] = format_double(summary.mean);
        stage.stats["metric." + key + ".std"] = format_double(summary.stddev);
    }
    return stage;
}

StageResult run_importance(const Config& config) {
    require_artifact(config, "model.txt", "train", "importance");
    require_artifact(config, "feature_matrix.csv", "featurize", "importance");
    const PcModel model = read_pc_model(artifact(config, "model.txt"));
    const auto rows = read_feature_matrix(artifact(config, "feature_matrix.csv"));
    const int repeats = static_cast<int>(config.get_int("importance.repeats"));
    const ImportanceReport report = permutation_importance(
        model, rows, repeats, static_cast<std::uint64_t>(config.get_int("seed")));

    const std::string path = artifact(config, "importance.csv");
    std::ofstream out(path);
    if (!out) throw PipelineError("cannot write " + path);
    out << "feature,mean_increase";
    for (int r = 1; r <= repeats; ++r) out << ",repeat_" << r;
    out << "\n";
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        out << kFeatureNames[fi] << ',' << format_double(report.mean_increase[fi]);
        for (const auto& repeat : report.per_repeat) out << ',' << format_double(repeat[fi]);
        out << '\n';
    }

    StageResult stage{"importance", {path}, {}};
    stage.stats["base_loss"] = format_double(report.base_loss);
    stage.stats["repeats"] = std::to_string(repeats);
    return stage;
}

}  // namespace

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"synth",     "ingest", "split",
                                                   "featurize", "train",  "score",
                                                   "recommend", "evaluate", "importance"};
    return names;
}

StageResult run_stage(const std::string& stage, const Config& config) {
    fs::create_directories(config.get_string("paths.workdir"));
    StageResult result;
    if (stage == "synth") {
        result = run_synth(config);
    } else if (stage == "ingest") {
        result = run_ingest(config);
    } else if (stage == "split") {
        result = run_split(config);
    } else if (stage == "featurize") {
        result = run_featurize(config);
    } else if (stage == "train") {
        result = run_train(config);
    } else if (stage == "score") {
        result = run_score(config);
    } else if (stage == "recommend") {
        result = run_recommend(config);
    } else if (stage == "evaluate") {
        result = run_evaluate(config);
    } else if (stage == "importance") {
        result = run_importance(config);
    } else {
        std::string names;
        for (const auto& name : stage_names()) {
            if (!names.empty()) names += ", ";
            names += name;
        }
        throw PipelineError("unknown stage `" + stage + "`; expected one of: " + names);
    }
    std::map<std::string, std::string> stats;
    for (const auto& [key, value] : result.stats) stats["stats." + key] = value;
    const std::string manifest = artifact(config, stage + ".manifest");
    config.write(manifest, stats);
    result.outputs.push_back(manifest);
    return result;
}

}  // namespace pcic
