#include "pcic/baselines.hpp"

#include <algorithm>
#include <set>

namespace pcic {

namespace {

// Distinct items the user purchased, with per-user basket counts.
std::map<std::string, int> user_item_baskets(const UserHistory& user) {
    std::map<std::string, int> counts;
    for (const auto& basket : user.baskets) {
        std::set<std::string> in_basket;
        for (const auto& item : basket.items) in_basket.insert(item.item_id);
        for (const auto& id : in_basket) counts[id] += 1;
    }
    return counts;
}

std::vector<std::string> rank_by_score(const std::map<std::string, double>& scores) {
    std::vector<std::pair<std::string, double>> entries(scores.begin(), scores.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (auto& [id, score] : entries) out.push_back(id);
    return out;
}

}  // namespace

std::map<std::string, int> compute_item_popularity(std::span<const UserHistory> histories) {
    std::map<std::string, int> popularity;
    for (const auto& user : histories) {
        for (const auto& [item_id, baskets] : user_item_baskets(user)) {
            popularity[item_id] += baskets;
        }
    }
    return popularity;
}

std::map<std::string, double> compute_item_repurchase_rates(
    std::span<const UserHistory> histories) {
    std::map<std::string, std::pair<int, int>> counts;  // item → (buyers, repeat buyers)
    for (const auto& user : histories) {
        for (const auto& [item_id, baskets] : user_item_baskets(user)) {
            auto& [buyers, repeat] = counts[item_id];
            buyers += 1;
            if (baskets >= 2) repeat += 1;
        }
    }
    std::map<std::string, double> rates;
    for (const auto& [item_id, c] : counts) {
        rates[item_id] = c.first > 0 ? static_cast<double>(c.second) / c.first : 0.0;
    }
    return rates;
}

std::vector<std::string> topsell_ranking(const UserHistory& user,
                                         const std::map<std::string, int>& popularity) {
    std::map<std::string, double> scores;
    for (const auto& [item_id, baskets] : user_item_baskets(user)) {
        auto it = popularity.find(item_id);
        scores[item_id] = it != popularity.end() ? static_cast<double>(it->second) : 0.0;
    }
    return rank_by_score(scores);
}

std::vector<std::string> fbought_ranking(const UserHistory& user) {
    std::map<std::string, double> scores;
    for (const auto& [item_id, baskets] : user_item_baskets(user)) {
        scores[item_id] = static_cast<double>(baskets);
    }
    return rank_by_score(scores);
}

std::vector<std::string> rcp_ranking(const UserHistory& user,
                                     const std::map<std::string, double>& repurchase_rates) {
    std::map<std::string, double> scores;
    for (const auto& [item_id, baskets] : user_item_baskets(user)) {
        auto it = repurchase_rates.find(item_id);
        scores[item_id] = it != repurchase_rates.end() ? it->second : 0.0;
    }
    return rank_by_score(scores);
}

}  // namespace pcic
