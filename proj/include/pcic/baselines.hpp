#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcic/transactions.hpp"

namespace pcic {

// Corpus-wide popularity: number of baskets containing the item.
std::map<std::string, int> compute_item_popularity(std::span<const UserHistory> histories);

// Fraction of an item's buyers who bought it in two or more baskets.
std::map<std::string, double> compute_item_repurchase_rates(
    std::span<const UserHistory> histories);

// Each baseline ranks the items the user has already purchased. Ties resolve
// by item_id ascending.

// Most popular items corpus-wide.
std::vector<std::string> topsell_ranking(const UserHistory& user,
                                         const std::map<std::string, int>& popularity);

// Items the user bought in the most baskets.
std::vector<std::string> fbought_ranking(const UserHistory& user);

// Items with the highest repeat-buyer fraction.
std::vector<std::string> rcp_ranking(const UserHistory& user,
                                     const std::map<std::string, double>& repurchase_rates);

}  // namespace pcic
