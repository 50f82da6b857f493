#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pcic/icrank.hpp"
#include "pcic/mlp.hpp"
#include "pcic/transactions.hpp"

namespace pcic {

// How category ranks and within-category item ranks combine into one list.
// kIcMajor round-robins: every category's first item, then every second item,
// with category order breaking ties. kPcMajor exhausts each category before
// moving to the next.
enum class MergeOrder { kIcMajor, kPcMajor };

struct Recommendation {
    std::string user_id;
    int rank = 0;  // 1-based in the final list
    std::string item_id;
    std::string category_id;
    int rk_pc = 0;  // category rank for this user
    int rk_ic = 0;  // item rank within its category, after basket-size compression
    double pc_score = 0.0;
};

// Merges one user's ranked categories with the ranked items inside each.
// categories must carry 1-based ranks (the score_categories output for one
// user); items_by_category holds rank_items_in_category output.
std::vector<Recommendation> merge_pc_ic(
    const std::string& user_id, std::span<const PcScore> categories,
    const std::map<std::string, std::vector<RankedItem>>& items_by_category, MergeOrder order);

struct FilterConfig {
    int min_item_purchases = 2;          // corpus-wide basket count within the lookback
    int lookback_months = 6;             // <= 0 means the whole history
    double repurchase_threshold = 0.0;   // minimum repeat-buyer fraction; <= 0 disables
    std::set<std::string> excluded_categories;
};

struct FilterStats {
    std::map<std::string, int> recent_purchases;
    std::map<std::string, double> repurchase_rate;
};

FilterStats compute_filter_stats(std::span<const UserHistory> histories, Date reference,
                                 int lookback_months);

// Drops recommendations that fail the config's checks and renumbers the
// survivors contiguously per user. Input may concatenate several users'
// lists; user boundaries follow the input order.
std::vector<Recommendation> apply_filters(std::vector<Recommendation> recs,
                                          const FilterStats& stats, const FilterConfig& config);

// Keeps each user's first k recommendations.
std::vector<Recommendation> top_k(std::vector<Recommendation> recs, int k);

void write_recommendations_csv(const std::string& path, std::span<const Recommendation> recs);
void write_recommendations_jsonl(const std::string& path, std::span<const Recommendation> recs);

// One validation user's inputs for the alpha/beta grid search.
struct TuneUser {
    std::vector<PcScore> categories;  // ranked categories for this user
    std::map<std::string, std::vector<ItemStats>> items;
    std::set<std::string> truth;  // items repurchased in the label window
};

struct TuneResult {
    double alpha = 0.5;
    double beta = 0.5;
    double best_ndcg = 0.0;
};

// Searches alpha, beta over {0, 0.1, ..., 1.0}^2 for the pair maximizing mean
// NDCG@k of the merged lists over users with nonempty truth. Ties keep the
// smaller alpha, then the smaller beta.
TuneResult tune_alpha_beta(std::span<const TuneUser> users, const IcConfig& base,
                           MergeOrder order, int k = 10);

}  // namespace pcic
