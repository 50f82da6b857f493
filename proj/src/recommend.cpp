#include "pcic/recommend.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "pcic/baselines.hpp"
#include "pcic/csv.hpp"
#include "pcic/dates.hpp"
#include "pcic/metrics.hpp"
#include "pcic/util.hpp"

namespace pcic {

namespace {

// Renumber ranks 1..n per user, preserving order.
void renumber(std::vector<Recommendation>& recs) {
    int rank = 0;
    const std::string* current_user = nullptr;
    for (auto& rec : recs) {
        if (current_user == nullptr || *current_user != rec.user_id) {
            current_user = &rec.user_id;
            rank = 0;
        }
        rec.rank = ++rank;
    }
}

}  // namespace

std::vector<Recommendation> merge_pc_ic(
    const std::string& user_id, std::span<const PcScore> categories,
    const std::map<std::string, std::vector<RankedItem>>& items_by_category, MergeOrder order) {
    std::vector<Recommendation> out;
    for (const auto& cat : categories) {
        auto it = items_by_category.find(cat.category_id);
        if (it == items_by_category.end()) continue;
        for (const auto& item : it->second) {
            Recommendation rec;
            rec.user_id = user_id;
            rec.item_id = item.item_id;
            rec.category_id = cat.category_id;
            rec.rk_pc = cat.rank;
            rec.rk_ic = item.ir;
            rec.pc_score = cat.score;
            out.push_back(std::move(rec));
        }
    }
    // rk_ic ties within one category keep their pre-compression order, which
    // the per-category input already encodes.
    std::stable_sort(out.begin(), out.end(), [&](const Recommendation& a, const Recommendation& b) {
        if (order == MergeOrder::kIcMajor) {
            if (a.rk_ic != b.rk_ic) return a.rk_ic < b.rk_ic;
            return a.rk_pc < b.rk_pc;
        }
        if (a.rk_pc != b.rk_pc) return a.rk_pc < b.rk_pc;
        return a.rk_ic < b.rk_ic;
    });
    renumber(out);
    return out;
}

FilterStats compute_filter_stats(std::span<const UserHistory> histories, Date reference,
                                 int lookback_months) {
    FilterStats stats;
    const bool windowed = lookback_months > 0;
    const Date window_start = windowed ? add_months(reference, -lookback_months) : 0;
    for (const auto& user : histories) {
        for (const auto& basket : user.baskets) {
            if (basket.date >= reference) continue;
            if (windowed && basket.date < window_start) continue;
            std::set<std::string> in_basket;
            for (const auto& item : basket.items) in_basket.insert(item.item_id);
            for (const auto& id : in_basket) stats.recent_purchases[id] += 1;
        }
    }
    stats.repurchase_rate = compute_item_repurchase_rates(histories);
    return stats;
}

std::vector<Recommendation> apply_filters(std::vector<Recommendation> recs,
                                          const FilterStats& stats, const FilterConfig& config) {
    std::vector<Recommendation> kept;
    kept.reserve(recs.size());
    for (auto& rec : recs) {
        if (config.excluded_categories.count(rec.category_id) != 0) continue;
        auto recent = stats.recent_purchases.find(rec.item_id);
        const int purchases = recent != stats.recent_purchases.end() ? recent->second : 0;
        if (purchases < config.min_item_purchases) continue;
        if (config.repurchase_threshold > 0.0) {
            auto rate = stats.repurchase_rate.find(rec.item_id);
            const double r = rate != stats.repurchase_rate.end() ? rate->second : 0.0;
            if (r < config.repurchase_threshold) continue;
        }
        kept.push_back(std::move(rec));
    }
    renumber(kept);
    return kept;
}

std::vector<Recommendation> top_k(std::vector<Recommendation> recs, int k) {
    if (k < 0) throw std::invalid_argument("top_k: k must be nonnegative");
    std::vector<Recommendation> kept;
    kept.reserve(recs.size());
    for (auto& rec : recs) {
        if (rec.rank <= k) kept.push_back(std::move(rec));
    }
    return kept;
}

void write_recommendations_csv(const std::string& path, std::span<const Recommendation> recs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write recommendations: " + path);
    out << "user_id,rank,item_id,category_id,rk_pc,rk_ic,pc_score\n";
    for (const auto& rec : recs) {
        out << csv_escape(rec.user_id) << ',' << rec.rank << ',' << csv_escape(rec.item_id) << ','
            << csv_escape(rec.category_id) << ',' << rec.rk_pc << ',' << rec.rk_ic << ','
            << format_double(rec.pc_score) << '\n';
    }
}

void write_recommendations_jsonl(const std::string& path, std::span<const Recommendation> recs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write recommendations: " + path);
    for (const auto& rec : recs) {
        const nlohmann::json row = {
            {"user_id", rec.user_id}, {"rank", rec.rank},     {"item_id", rec.item_id},
            {"category_id", rec.category_id}, {"rk_pc", rec.rk_pc}, {"rk_ic", rec.rk_ic},
            {"pc_score", rec.pc_score}};
        out << row.dump() << '\n';
    }
}

TuneResult tune_alpha_beta(std::span<const TuneUser> users, const IcConfig& base,
                           MergeOrder order, int k) {
    TuneResult best;
    best.best_ndcg = -1.0;
    for (int ai = 0; ai <= 10; ++ai) {
        for (int bi = 0; bi <= 10; ++bi) {
            IcConfig config = base;
            config.alpha = ai / 10.0;
            config.beta = bi / 10.0;
            double total = 0.0;
            std::size_t counted = 0;
            for (const auto& user : users) {
                if (user.truth.empty()) continue;
                std::map<std::string, std::vector<RankedItem>> ranked;
                for (const auto& [category_id, items] : user.items) {
                    ranked[category_id] = rank_items_in_category(items, config);
                }
                const auto merged = merge_pc_ic("", user.categories, ranked, order);
                std::vector<std::string> item_ids;
                item_ids.reserve(merged.size());
                for (const auto& rec : merged) item_ids.push_back(rec.item_id);
                total += ndcg_at_k(item_ids, user.truth, k);
                ++counted;
            }
            if (counted == 0) continue;  // nobody to score: leave the sentinel
            const double mean = total / static_cast<double>(counted);
            if (mean > best.best_ndcg) {
                best.best_ndcg = mean;
                best.alpha = config.alpha;
                best.beta = config.beta;
            }
        }
    }
    if (best.best_ndcg < 0.0) {
        // No validation user had truth; keep the base weights.
        best.alpha = base.alpha;
        best.beta = base.beta;
        best.best_ndcg = 0.0;
    }
    return best;
}

}  // namespace pcic
