#include "pcic/survival.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace pcic {

namespace {

struct Observations {
    std::vector<int> event_gaps;
    std::vector<int> censor_gaps;
};

LifeTable table_from_observations(const std::string& category_id, const Observations& obs) {
    int k_max = 0;
    for (int k : obs.event_gaps) k_max = std::max(k_max, k);
    for (int k : obs.censor_gaps) k_max = std::max(k_max, k);

    LifeTable table;
    table.category_id = category_id;
    table.n_event.assign(static_cast<std::size_t>(k_max) + 1, 0);
    table.n_censor.assign(static_cast<std::size_t>(k_max) + 1, 0);
    table.n_risk.assign(static_cast<std::size_t>(k_max) + 1, 0);
    for (int k : obs.event_gaps) ++table.n_event[static_cast<std::size_t>(k)];
    for (int k : obs.censor_gaps) ++table.n_censor[static_cast<std::size_t>(k)];
    table.n_total = static_cast<std::int64_t>(obs.event_gaps.size() + obs.censor_gaps.size());
    std::int64_t at_risk = table.n_total;
    for (int k = 0; k <= k_max; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        table.n_risk[idx] = at_risk;
        at_risk -= table.n_event[idx] + table.n_censor[idx];
    }
    return table;
}

// Adds one user's gaps for one category: events between consecutive purchase
// days, one censored interval from the last purchase to observation_end.
void collect_user(const std::vector<CategoryEvent>& events, Date observation_end,
                  Observations& obs) {
    for (std::size_t i = 1; i < events.size(); ++i) {
        obs.event_gaps.push_back(static_cast<int>(events[i].date - events[i - 1].date));
    }
    const Date last = events.back().date;
    if (observation_end >= last) {
        obs.censor_gaps.push_back(static_cast<int>(observation_end - last));
    }
}

}  // namespace

LifeTable build_life_table(std::span<const UserHistory> feature_histories,
                           const std::string& category_id, Date observation_end) {
    Observations obs;
    for (const auto& user : feature_histories) {
        const auto events = per_category_events(user);
        auto it = events.find(category_id);
        if (it == events.end()) continue;
        collect_user(it->second, observation_end, obs);
    }
    if (obs.event_gaps.empty() && obs.censor_gaps.empty()) {
        throw SurvivalError("no purchases of category '" + category_id + "' in feature period");
    }
    return table_from_observations(category_id, obs);
}

std::map<std::string, LifeTable> build_all_life_tables(const SplitResult& split) {
    std::map<std::string, Observations> by_category;
    for (const auto& user : split.feature_histories) {
        const Date horizon = split.reference_date(user.user_id) - 1;
        for (const auto& [category_id, events] : per_category_events(user)) {
            collect_user(events, horizon, by_category[category_id]);
        }
    }
    std::map<std::string, LifeTable> tables;
    for (const auto& [category_id, obs] : by_category) {
        tables.emplace(category_id, table_from_observations(category_id, obs));
    }
    return tables;
}

SurvivalCurves trivial_curves() {
    SurvivalCurves curves;
    curves.hazard = {0.0};
    curves.cum_hazard = {0.0};
    curves.survival = {1.0};
    curves.cum_survival = {0.0};
    curves.norm_risk = {1.0};
    curves.norm_event = {0.0};
    return curves;
}

SurvivalCurves compute_curves(const LifeTable& table, std::int64_t min_observations) {
    if (table.n_total < min_observations) return trivial_curves();

    const std::size_t n = table.n_risk.size();
    SurvivalCurves curves;
    curves.hazard.resize(n);
    curves.cum_hazard.resize(n);
    curves.survival.resize(n);
    curves.cum_survival.resize(n);
    curves.norm_risk.resize(n);
    curves.norm_event.resize(n);

    double cum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double risk = static_cast<double>(table.n_risk[k]);
        curves.hazard[k] = risk > 0 ? static_cast<double>(table.n_event[k]) / risk : 0.0;
        cum += curves.hazard[k];
        curves.cum_hazard[k] = cum;
        curves.survival[k] = std::exp(-cum);
        curves.norm_risk[k] = static_cast<double>(table.n_risk[k]) /
                              static_cast<double>(table.n_risk[0]);
        curves.norm_event[k] = static_cast<double>(table.n_event[k]) /
                               static_cast<double>(table.n_total);
    }
    const int k_max = static_cast<int>(n) - 1;
    for (int k = 0; k <= k_max; ++k) {
        const int lo = std::max(k - 3, 0);
        const int hi = std::min(k + 3, k_max);
        curves.cum_survival[static_cast<std::size_t>(k)] =
            curves.survival[static_cast<std::size_t>(lo)] -
            curves.survival[static_cast<std::size_t>(hi)];
    }
    return curves;
}

std::array<double, 6> survival_features(const SurvivalCurves& curves, int k) {
    const std::size_t idx =
        static_cast<std::size_t>(std::clamp(k, 0, curves.k_max()));
    return {curves.hazard[idx],     curves.cum_hazard[idx], curves.survival[idx],
            curves.cum_survival[idx], curves.norm_risk[idx],  curves.norm_event[idx]};
}

void write_life_tables_csv(const std::string& path,
                           const std::map<std::string, LifeTable>& tables) {
    std::ofstream out(path);
    if (!out) throw SurvivalError("cannot write life table dump: " + path);
    out << "category_id,k,n_risk,n_event,n_censor\n";
    for (const auto& [category_id, table] : tables) {
        for (int k = 0; k <= table.k_max(); ++k) {
            const auto idx = static_cast<std::size_t>(k);
            out << category_id << ',' << k << ',' << table.n_risk[idx] << ','
                << table.n_event[idx] << ',' << table.n_censor[idx] << '\n';
        }
    }
}

}  // namespace pcic
