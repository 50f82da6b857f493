#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcic/transactions.hpp"

namespace pcic {

// Per-item purchase statistics inside one (user, category) pair, taken over
// the feature window. frequency counts baskets containing the item;
// days_since is measured to the day before the reference date, matching the
// category features.
struct ItemStats {
    std::string item_id;
    std::string category_id;
    int frequency = 0;
    int days_since = 0;
    double nib = 1.0;  // max(1, mean units per basket that contains the item)
};

struct IcConfig {
    double alpha = 0.5;  // weight of the recency rank
    double beta = 0.5;   // weight of the frequency rank
    bool use_nib = true;
};

// Groups a user's purchased items by category; items within a category are
// ordered by item_id.
std::map<std::string, std::vector<ItemStats>> compute_item_stats(const UserHistory& user,
                                                                 Date reference);

struct RankedItem {
    std::string item_id;
    int freq_rank = 0;     // 1 = most frequently bought
    int recency_rank = 0;  // 1 = most recently bought
    double combined = 0.0;
    int rk = 0;  // 1-based rank of combined, ascending
    int ir = 0;  // rk compressed by items-per-basket: ceil(rk / nib)
    double nib = 1.0;
};

// Ranks one category's items: frequency and recency ranks are blended with
// alpha/beta, and the blended rank is divided by the typical basket quantity
// so bulk-bought items surface earlier. All rank ties resolve by frequency
// descending, then days since purchase ascending, then item_id. Output is
// ordered (ir, rk) ascending.
std::vector<RankedItem> rank_items_in_category(std::vector<ItemStats> items,
                                               const IcConfig& config);

}  // namespace pcic
