#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/split.hpp"
#include "pcic/transactions.hpp"

namespace pcic {

/// Day-indexed counts over inter-purchase gaps for one category, pooled
/// across users. Index k runs 0..K_max. One observation per consecutive pair
/// of purchase days (an event at gap k) plus one censored observation per
/// user for the open interval from their last purchase to the observation
/// horizon.
struct LifeTable {
    std::string category_id;
    std::vector<std::int64_t> n_risk;
    std::vector<std::int64_t> n_event;
    std::vector<std::int64_t> n_censor;
    std::int64_t n_total = 0;  // == n_risk[0]

    int k_max() const { return static_cast<int>(n_risk.size()) - 1; }
};

/// The six derived curves, all indexed by gap day k:
///   hazard_k       = n_event_k / n_risk_k            (0 when the risk set is empty)
///   cum_hazard_k   = sum_{j<=k} hazard_j
///   survival_k     = exp(-cum_hazard_k)
///   cum_survival_k = survival_{k-3} - survival_{k+3}  (event mass within +-3 days,
///                    indices clamped to [0, K_max]; the weekly-shopper window)
///   norm_risk_k    = n_risk_k / n_risk_0
///   norm_event_k   = n_event_k / n_total
struct SurvivalCurves {
    std::vector<double> hazard;
    std::vector<double> cum_hazard;
    std::vector<double> survival;
    std::vector<double> cum_survival;
    std::vector<double> norm_risk;
    std::vector<double> norm_event;

    int k_max() const { return static_cast<int>(hazard.size()) - 1; }
};

class SurvivalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Builds the life table for one category over the feature histories, using a
/// single censoring horizon for every user (the last fully observed day).
/// Throws SurvivalError when no user purchased the category.
LifeTable build_life_table(std::span<const UserHistory> feature_histories,
                           const std::string& category_id, Date observation_end);

/// Builds tables for every category in one pass. Censoring horizons come from
/// the split's per-user reference dates (reference - 1).
std::map<std::string, LifeTable> build_all_life_tables(const SplitResult& split);

/// Tables with fewer observations than min_observations produce the trivial
/// all-censored curves (hazard 0, survival 1) instead of noisy estimates.
SurvivalCurves compute_curves(const LifeTable& table, std::int64_t min_observations = 2);

/// The degenerate curve set used for unseen categories and undersized tables.
SurvivalCurves trivial_curves();

/// Samples the six curves at k days since the user's last category purchase;
/// k beyond K_max clamps to K_max. Order: hazard, cum_hazard, survival,
/// cum_survival, norm_risk, norm_event.
std::array<double, 6> survival_features(const SurvivalCurves& curves, int k);

/// Audit dump, one row per (category, k): category_id,k,n_risk,n_event,n_censor.
void write_life_tables_csv(const std::string& path,
                           const std::map<std::string, LifeTable>& tables);

}  // namespace pcic
