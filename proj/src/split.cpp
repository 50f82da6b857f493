#include "pcic/split.hpp"

#include <algorithm>
#include <set>

namespace pcic {

namespace {

int distinct_feature_categories(const UserHistory& user) {
    std::set<std::string> cats;
    for (const auto& basket : user.baskets) {
        for (const auto& item : basket.items) cats.insert(item.category_id);
    }
    return static_cast<int>(cats.size());
}

// Splits one user's baskets on [window_start, split) / [split, window_end].
void split_user(const UserHistory& user, Date window_start, Date split, Date window_end,
                UserHistory& features, UserHistory& labels) {
    features.user_id = user.user_id;
    labels.user_id = user.user_id;
    for (const auto& basket : user.baskets) {
        if (basket.date < window_start) continue;
        if (basket.date < split) {
            features.baskets.push_back(basket);
        } else if (basket.date <= window_end) {
            labels.baskets.push_back(basket);
        }
    }
}

}  // namespace

SplitResult temporal_split(std::span<const UserHistory> histories, const SplitConfig& config) {
    if (config.label_window_days <= 0 || config.history_days <= config.label_window_days) {
        throw SplitError("label_window_days must be positive and smaller than history_days");
    }
    Date max_date = 0;
    bool any = false;
    for (const auto& user : histories) {
        for (const auto& basket : user.baskets) {
            max_date = any ? std::max(max_date, basket.date) : basket.date;
            any = true;
        }
    }
    if (!any) throw SplitError("empty corpus: no baskets to split");

    SplitResult result;
    result.max_date = max_date;
    result.split_date = max_date - config.label_window_days + 1;
    const Date window_start = max_date - config.history_days;

    for (const auto& user : histories) {
        UserHistory features, labels;
        split_user(user, window_start, result.split_date, max_date, features, labels);
        if (features.baskets.empty()) continue;
        if (config.engaged_only &&
            distinct_feature_categories(features) <= config.engaged_category_threshold) {
            continue;
        }
        result.user_reference.emplace(user.user_id, result.split_date);
        result.feature_histories.push_back(std::move(features));
        result.label_histories.push_back(std::move(labels));
    }
    if (result.feature_histories.empty()) {
        throw SplitError("no feature-period data: all baskets fall inside the label window");
    }
    return result;
}

SplitResult last_basket_split(std::span<const UserHistory> histories, const SplitConfig& config) {
    SplitResult result;
    Date max_date = 0;
    bool any = false;
    for (const auto& user : histories) {
        if (user.baskets.size() < 2) continue;  // need history plus a basket to predict
        const Date last = user.baskets.back().date;
        const Date split = last;  // label period = the last basket's day
        UserHistory features, labels;
        split_user(user, split - config.history_days, split, last, features, labels);
        // Keep only the final basket as the label; earlier same-day orders stay
        // ambiguous, so the whole last day is the label period.
        if (features.baskets.empty() || labels.baskets.empty()) continue;
        result.user_reference.emplace(user.user_id, split);
        result.feature_histories.push_back(std::move(features));
        result.label_histories.push_back(std::move(labels));
        max_date = any ? std::max(max_date, last) : last;
        any = true;
    }
    if (!any) throw SplitError("no user has both history and a final basket");
    result.max_date = max_date;
    result.split_date = max_date;
    return result;
}

SplitResult subset_split(const SplitResult& split, const std::set<std::string>& user_ids) {
    SplitResult out;
    out.split_date = split.split_date;
    out.max_date = split.max_date;
    for (std::size_t i = 0; i < split.feature_histories.size(); ++i) {
        const auto& user = split.feature_histories[i];
        if (user_ids.count(user.user_id) == 0) continue;
        out.feature_histories.push_back(user);
        out.label_histories.push_back(split.label_histories[i]);
        auto ref = split.user_reference.find(user.user_id);
        if (ref != split.user_reference.end()) out.user_reference.insert(*ref);
    }
    return out;
}

LabelSet build_labels(const SplitResult& split) {
    LabelSet labels;
    labels.split_date = split.split_date;
    for (std::size_t i = 0; i < split.feature_histories.size(); ++i) {
        const auto& features = split.feature_histories[i];
        const auto& label_period = split.label_histories[i];
        std::set<std::string> repurchased;
        for (const auto& basket : label_period.baskets) {
            for (const auto& item : basket.items) repurchased.insert(item.category_id);
        }
        std::set<std::string> seen;
        for (const auto& basket : features.baskets) {
            for (const auto& item : basket.items) {
                if (!seen.insert(item.category_id).second) continue;
                labels.labels[{features.user_id, item.category_id}] =
                    repurchased.count(item.category_id) ? 1 : 0;
            }
        }
    }
    return labels;
}

}  // namespace pcic
