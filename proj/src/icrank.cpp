#include "pcic/icrank.hpp"

#include <algorithm>
#include <cmath>

namespace pcic {

namespace {

// Shared tie order: more frequent first, more recent first, then item_id.
bool tie_less(const ItemStats& a, const ItemStats& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.days_since != b.days_since) return a.days_since < b.days_since;
    return a.item_id < b.item_id;
}

std::vector<int> ranks_by(const std::vector<ItemStats>& items,
                          bool (*less)(const ItemStats&, const ItemStats&)) {
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return less(items[a], items[b]);
    });
    std::vector<int> rank(items.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        rank[order[pos]] = static_cast<int>(pos) + 1;
    }
    return rank;
}

}  // namespace

std::map<std::string, std::vector<ItemStats>> compute_item_stats(const UserHistory& user,
                                                                 Date reference) {
    struct Acc {
        int baskets = 0;
        std::int64_t units = 0;
        Date last = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;  // (category, item)
    for (const auto& basket : user.baskets) {
        for (const auto& item : basket.items) {
            Acc& a = acc[{item.category_id, item.item_id}];
            a.baskets += 1;
            a.units += item.quantity;
            a.last = std::max(a.last, basket.date);
        }
    }
    std::map<std::string, std::vector<ItemStats>> out;
    for (const auto& [key, a] : acc) {
        ItemStats s;
        s.category_id = key.first;
        s.item_id = key.second;
        s.frequency = a.baskets;
        s.days_since = static_cast<int>(reference - 1 - a.last);
        s.nib = std::max(1.0, static_cast<double>(a.units) / a.baskets);
        out[key.first].push_back(std::move(s));
    }
    return out;
}

std::vector<RankedItem> rank_items_in_category(std::vector<ItemStats> items,
                                               const IcConfig& config) {
    const auto freq_ranks = ranks_by(items, [](const ItemStats& a, const ItemStats& b) {
        if (a.frequency != b.frequency) return a.frequency > b.frequency;
        return tie_less(a, b);
    });
    const auto recency_ranks = ranks_by(items, [](const ItemStats& a, const ItemStats& b) {
        if (a.days_since != b.days_since) return a.days_since < b.days_since;
        return tie_less(a, b);
    });

    std::vector<RankedItem> ranked(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        ranked[i].item_id = items[i].item_id;
        ranked[i].freq_rank = freq_ranks[i];
        ranked[i].recency_rank = recency_ranks[i];
        ranked[i].combined =
            config.alpha * recency_ranks[i] + config.beta * freq_ranks[i];
        ranked[i].nib = items[i].nib;
    }

    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ranked[a].combined != ranked[b].combined) {
            return ranked[a].combined < ranked[b].combined;
        }
        return tie_less(items[a], items[b]);
    });
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        RankedItem& r = ranked[order[pos]];
        r.rk = static_cast<int>(pos) + 1;
        r.ir = config.use_nib ? static_cast<int>(std::ceil(r.rk / r.nib)) : r.rk;
    }

    std::sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.ir != b.ir) return a.ir < b.ir;
        return a.rk < b.rk;
    });
    return ranked;
}

}  // namespace pcic
