#include "pcic/crossval.hpp"

#include <algorithm>
#include <fstream>

#include "pcic/baselines.hpp"
#include "pcic/survival.hpp"
#include "pcic/util.hpp"

namespace pcic {

namespace {

std::set<std::string> items_of(const UserHistory& user) {
    std::set<std::string> items;
    for (const auto& basket : user.baskets) {
        for (const auto& item : basket.items) items.insert(item.item_id);
    }
    return items;
}

std::map<std::string, std::vector<PcScore>> group_scores(std::vector<PcScore> scores) {
    std::map<std::string, std::vector<PcScore>> grouped;
    for (auto& s : scores) grouped[s.user_id].push_back(std::move(s));
    return grouped;
}

struct FoldData {
    SplitResult split;
    std::vector<FeatureRow> rows;
    LabelSet labels;
};

FoldData featurize_subset(const SplitResult& full, const std::set<std::string>& users,
                          const std::map<std::string, SurvivalCurves>& curves,
                          const ArimaFallbacks& fallbacks, const CrossvalConfig& config) {
    FoldData data;
    data.split = subset_split(full, users);
    data.labels = build_labels(data.split);
    data.rows = assemble_feature_matrix(data.split, curves, data.labels, fallbacks,
                                        config.features, config.threads);
    return data;
}

double mean_or_zero(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

}  // namespace

std::vector<std::size_t> seeded_user_order(std::span<const std::string> user_ids,
                                           std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(user_ids.size());
    for (std::size_t i = 0; i < user_ids.size(); ++i) {
        keyed[i] = {mix_seed(seed, fnv1a64(user_ids[i])), i};
    }
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return user_ids[a.second] < user_ids[b.second];
    });
    std::vector<std::size_t> order(user_ids.size());
    for (std::size_t pos = 0; pos < keyed.size(); ++pos) order[pos] = keyed[pos].second;
    return order;
}

std::vector<int> assign_folds(std::span<const std::string> user_ids, int folds,
                              std::uint64_t seed) {
    if (folds < 2) throw CrossvalError("fold count must be at least 2");
    const auto order = seeded_user_order(user_ids, seed);
    std::vector<int> fold(user_ids.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
    return fold;
}

std::set<std::string> repurchased_items(const UserHistory& feature, const UserHistory& label) {
    const auto before = items_of(feature);
    std::set<std::string> truth;
    for (const auto& basket : label.baskets) {
        for (const auto& item : basket.items) {
            if (before.count(item.item_id) != 0) truth.insert(item.item_id);
        }
    }
    return truth;
}

CrossvalReport run_crossval(std::span<const UserHistory> histories,
                            const CrossvalConfig& config) {
    if (config.protocol != "label_window" && config.protocol != "last_basket") {
        throw CrossvalError("unknown evaluation protocol: " + config.protocol);
    }
    const SplitResult split = config.protocol == "last_basket"
                                  ? last_basket_split(histories, config.split)
                                  : temporal_split(histories, config.split);
    std::vector<std::string> user_ids;
    user_ids.reserve(split.feature_histories.size());
    for (const auto& user : split.feature_histories) user_ids.push_back(user.user_id);
    if (static_cast<int>(user_ids.size()) < config.min_users) {
        throw CrossvalError("need at least " + std::to_string(config.min_users) +
                            " evaluable users, have " + std::to_string(user_ids.size()));
    }

    const auto folds = assign_folds(user_ids, config.folds, config.seed);
    const auto order = seeded_user_order(user_ids, config.seed);

    // Baselines rank against statistics of the full feature corpus; they see
    // no label-window data.
    const auto popularity = compute_item_popularity(split.feature_histories);
    const auto repurchase_rates = compute_item_repurchase_rates(split.feature_histories);
    std::map<std::string, const UserHistory*> feature_by_user;
    std::map<std::string, const UserHistory*> label_by_user;
    for (std::size_t i = 0; i < split.feature_histories.size(); ++i) {
        feature_by_user[split.feature_histories[i].user_id] = &split.feature_histories[i];
        label_by_user[split.feature_histories[i].user_id] = &split.label_histories[i];
    }

    CrossvalReport report;
    report.split_date = split.split_date;
    report.n_users = static_cast<int>(user_ids.size());

    for (int f = 0; f < config.folds; ++f) {
        std::set<std::string> test_users;
        std::vector<std::string> pool;  // hash order, test fold removed
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const std::string& id = user_ids[order[pos]];
            if (folds[order[pos]] == f) {
                test_users.insert(id);
            } else {
                pool.push_back(id);
            }
        }
        const std::size_t n_val = pool.size() / 10;
        std::set<std::string> val_users(pool.begin(),
                                        pool.begin() + static_cast<std::ptrdiff_t>(n_val));
        std::set<std::string> train_users(pool.begin() + static_cast<std::ptrdiff_t>(n_val),
                                          pool.end());

        const SplitResult train_split = subset_split(split, train_users);
        const auto tables = build_all_life_tables(train_split);
        std::map<std::string, SurvivalCurves> curves;
        for (const auto& [category_id, table] : tables) {
            curves[category_id] = compute_curves(table);
        }
        const auto fallbacks = compute_arima_fallbacks(train_split.feature_histories);

        FoldData train = featurize_subset(split, train_users, curves, fallbacks, config);
        FoldData val = featurize_subset(split, val_users, curves, fallbacks, config);
        FoldData test = featurize_subset(split, test_users, curves, fallbacks, config);

        const TrainResult trained = train_pc_model(train.rows, val.rows, config.train);

        IcConfig ic = config.ic;
        if (config.tune_ic && !val.rows.empty()) {
            std::vector<TuneUser> tune_users;
            auto val_scores = group_scores(score_categories(trained.model, val.rows));
            for (auto& [user_id, categories] : val_scores) {
                TuneUser tu;
                tu.categories = std::move(categories);
                const UserHistory* feature = feature_by_user.at(user_id);
                tu.items = compute_item_stats(*feature, split.reference_date(user_id));
                tu.truth = repurchased_items(*feature, *label_by_user.at(user_id));
                tune_users.push_back(std::move(tu));
            }
            const TuneResult tuned =
                tune_alpha_beta(tune_users, config.ic, config.merge_order, config.top_k);
            ic.alpha = tuned.alpha;
            ic.beta = tuned.beta;
        }

        FoldReport fold_report;
        fold_report.fold = f;
        fold_report.n_train = static_cast<int>(train_users.size());
        fold_report.n_val = static_cast<int>(val_users.size());
        fold_report.n_test = static_cast<int>(test_users.size());
        fold_report.alpha = ic.alpha;
        fold_report.beta = ic.beta;

        auto test_scores = group_scores(score_categories(trained.model, test.rows));
        std::map<std::string, std::vector<double>> per_user;
        for (const auto& [user_id, categories] : test_scores) {
            const UserHistory* feature = feature_by_user.at(user_id);
            const UserHistory* label = label_by_user.at(user_id);
            const auto truth = repurchased_items(*feature, *label);

            // Category-level ranking quality, independent of item choice.
            std::set<std::string> category_truth;
            for (const auto& [key, lab] : test.labels.labels) {
                if (key.first == user_id && lab == 1) category_truth.insert(key.second);
            }
            if (!category_truth.empty()) {
                std::vector<std::string> category_list(categories.size());
                for (const auto& c : categories) {
                    category_list[static_cast<std::size_t>(c.rank - 1)] = c.category_id;
                }
                per_user["pc.ndcg"].push_back(
                    ndcg_at_k(category_list, category_truth, config.top_k));
            }

            if (truth.empty()) continue;
            fold_report.n_scored += 1;

            std::map<std::string, std::vector<RankedItem>> ranked;
            for (const auto& [category_id, items] :
                 compute_item_stats(*feature, split.reference_date(user_id))) {
                ranked[category_id] = rank_items_in_category(items, ic);
            }
            const auto merged = merge_pc_ic(user_id, categories, ranked, config.merge_order);
            std::vector<std::string> pcic_list;
            pcic_list.reserve(merged.size());
            for (const auto& rec : merged) pcic_list.push_back(rec.item_id);

            per_user["pcic.recall"].push_back(recall_at_k(pcic_list, truth, config.top_k));
            per_user["pcic.ndcg"].push_back(ndcg_at_k(pcic_list, truth, config.top_k));
            const auto topsell = topsell_ranking(*feature, popularity);
            per_user["topsell.recall"].push_back(recall_at_k(topsell, truth, config.top_k));
            per_user["topsell.ndcg"].push_back(ndcg_at_k(topsell, truth, config.top_k));
            const auto fbought = fbought_ranking(*feature);
            per_user["fbought.recall"].push_back(recall_at_k(fbought, truth, config.top_k));
            per_user["fbought.ndcg"].push_back(ndcg_at_k(fbought, truth, config.top_k));
            const auto rcp = rcp_ranking(*feature, repurchase_rates);
            per_user["rcp.recall"].push_back(recall_at_k(rcp, truth, config.top_k));
            per_user["rcp.ndcg"].push_back(ndcg_at_k(rcp, truth, config.top_k));
        }
        for (const auto& [key, values] : per_user) {
            fold_report.metrics[key] = mean_or_zero(values);
        }
        report.folds.push_back(std::move(fold_report));
    }

    std::map<std::string, std::vector<double>> across;
    for (const auto& fold : report.folds) {
        for (const auto& [key, value] : fold.metrics) across[key].push_back(value);
    }
    for (const auto& [key, values] : across) report.summary[key] = summarize(values);
    return report;
}

void write_crossval_report(const std::string& path, const CrossvalReport& report) {
    std::ofstream out(path);
    if (!out) throw CrossvalError("cannot write report: " + path);
    out << "folds = " << report.folds.size() << "\n"
        << "users = " << report.n_users << "\n"
        << "split_date = " << format_date(report.split_date) << "\n";
    for (const auto& [key, summary] : report.summary) {
        out << key << ".mean = " << format_double(summary.mean) << "\n"
            << key << ".std = " << format_double(summary.stddev) << "\n";
    }
    for (const auto& fold : report.folds) {
        const std::string prefix = "fold." + std::to_string(fold.fold) + ".";
        out << prefix << "n_train = " << fold.n_train << "\n"
            << prefix << "n_val = " << fold.n_val << "\n"
            << prefix << "n_test = " << fold.n_test << "\n"
            << prefix << "n_scored = " << fold.n_scored << "\n"
            << prefix << "alpha = " << format_double(fold.alpha) << "\n"
            << prefix << "beta = " << format_double(fold.beta) << "\n";
        for (const auto& [key, value] : fold.metrics) {
            out << prefix << key << " = " << format_double(value) << "\n";
        }
    }
}

}  // namespace pcic
