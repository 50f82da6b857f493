#pragma once

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcic/transactions.hpp"

namespace pcic {

struct SplitConfig {
    int label_window_days = 7;  // m
    int history_days = 548;     // 1.5 years of feature history
    bool engaged_only = false;
    int engaged_category_threshold = 25;
};

class SplitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Result of carving the corpus into a feature period and a label window.
/// reference_date(user) is the first day of the user's label period: the
/// global split_date under the temporal protocol, the user's last basket date
/// under the last-basket protocol. Feature-side "today" is reference - 1.
struct SplitResult {
    std::vector<UserHistory> feature_histories;
    std::vector<UserHistory> label_histories;  // aligned with feature_histories by index
    Date split_date = 0;
    Date max_date = 0;
    std::unordered_map<std::string, Date> user_reference;

    Date reference_date(const std::string& user_id) const {
        auto it = user_reference.find(user_id);
        return it != user_reference.end() ? it->second : split_date;
    }
};

/// Holds the label window out of the corpus: split_date = max_date - m + 1,
/// feature baskets are those with date in [max_date - history_days,
/// split_date), label baskets those in [split_date, max_date]. Users with no
/// feature-period baskets (and, with engaged_only, users at or below the
/// engaged category threshold) are dropped. Throws SplitError on an empty
/// corpus or when no feature data remains.
SplitResult temporal_split(std::span<const UserHistory> histories, const SplitConfig& config);

/// Per-user variant: each user's final basket becomes their label period and
/// everything before it (within history_days of it) the feature period.
SplitResult last_basket_split(std::span<const UserHistory> histories, const SplitConfig& config);

/// Restriction of a split to the given users, preserving order. Used to keep
/// fold training, validation and test data disjoint.
SplitResult subset_split(const SplitResult& split, const std::set<std::string>& user_ids);

struct LabelSet {
    // (user_id, category_id) -> 0/1; keys are exactly the categories the user
    // purchased in the feature period.
    std::map<std::pair<std::string, std::string>, int> labels;
    Date split_date = 0;
};

/// Label 1 iff the user repurchased the category inside their label window;
/// categories only seen in the label window get no row.
LabelSet build_labels(const SplitResult& split);

}  // namespace pcic
