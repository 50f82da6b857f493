#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/features.hpp"
#include "pcic/icrank.hpp"
#include "pcic/metrics.hpp"
#include "pcic/mlp.hpp"
#include "pcic/recommend.hpp"
#include "pcic/split.hpp"

namespace pcic {

class CrossvalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CrossvalConfig {
    int folds = 5;
    int top_k = 10;
    std::uint64_t seed = 42;
    std::string protocol = "label_window";  // or "last_basket"
    int min_users = 50;
    int threads = 0;
    bool tune_ic = true;  // grid-search alpha/beta per fold on the validation users
    SplitConfig split;
    FeatureConfig features;
    TrainConfig train;
    IcConfig ic;
    MergeOrder merge_order = MergeOrder::kIcMajor;
};

/// Positions into user_ids sorted by a seeded hash of the id (ties by id).
/// The shared ordering behind fold assignment and validation carve-outs.
std::vector<std::size_t> seeded_user_order(std::span<const std::string> user_ids,
                                           std::uint64_t seed);

/// Fold of each user, aligned with user_ids. Users are ordered by a seeded
/// hash of their id (ties by id) and dealt round-robin, so every fold's test
/// share is exact: 100 users over 5 folds gives 20 test users each.
std::vector<int> assign_folds(std::span<const std::string> user_ids, int folds,
                              std::uint64_t seed);

struct FoldReport {
    int fold = 0;
    int n_train = 0;
    int n_val = 0;
    int n_test = 0;
    int n_scored = 0;  // test users with at least one repurchased item
    double alpha = 0.5;
    double beta = 0.5;
    std::map<std::string, double> metrics;
};

struct CrossvalReport {
    std::vector<FoldReport> folds;
    std::map<std::string, MetricSummary> summary;  // per metric, across folds
    Date split_date = 0;
    int n_users = 0;
};

/// Items bought in the label period that the user had already bought in the
/// feature period; the ground truth of every item metric.
std::set<std::string> repurchased_items(const UserHistory& feature, const UserHistory& label);

/// Full evaluation: per fold, life tables and forecast fallbacks are fitted
/// on the training users, the category model early-stops on the held-out
/// validation users (one tenth of the non-test bucket), item-rank weights are
/// tuned there too, and the fold's test users are scored against the
/// popularity, own-frequency and repeat-rate baselines. Metric keys:
/// pcic/topsell/fbought/rcp with .recall and .ndcg suffixes, plus pc.ndcg for
/// the category ranking alone. Throws CrossvalError below min_users.
CrossvalReport run_crossval(std::span<const UserHistory> histories, const CrossvalConfig& config);

/// Writes the report as `key = value` lines: fold.N.* detail plus mean/std
/// per metric.
void write_crossval_report(const std::string& path, const CrossvalReport& report);

}  // namespace pcic
