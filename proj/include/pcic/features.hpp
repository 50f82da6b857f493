#pragma once

#include <array>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/split.hpp"
#include "pcic/survival.hpp"

namespace pcic {

/// Fixed input order of the category model. Version-stamped into persisted
/// models so a stale model rejects a mismatched matrix.
inline constexpr int kFeatureCount = 11;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "hazard",        "cum_hazard",       "survival",        "cum_survival",
    "norm_risk",     "norm_event",       "arima_date",      "arima_rate",
    "num_purchases", "trips_since_last", "days_since_last"};
inline constexpr const char* kFeatureSchemaVersion = "pc-features-v1";

struct FeatureRow {
    std::string user_id;
    std::string category_id;
    std::array<double, kFeatureCount> x{};
    int label = 0;
};

struct NormStats {
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> stddev{};  // zero-variance columns recorded as 1
};

class FeatureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct FeatureConfig {
    double arima_feature_cap = 365.0;
};

/// Per-category median gap and consumption rate over a training corpus,
/// backing the forecast fallbacks for users with little history. Categories
/// with no completed gap anywhere inherit the global medians.
struct ArimaFallbacks {
    std::map<std::string, double> median_gap;
    std::map<std::string, double> median_rate;
    double global_median_gap = 0.0;
    double global_median_rate = 0.0;

    double gap_for(const std::string& category_id) const;
    double rate_for(const std::string& category_id) const;
};

ArimaFallbacks compute_arima_fallbacks(std::span<const UserHistory> feature_histories);

/// Assembles one row per LabelSet key: the six survival features sampled at
/// k = days since last category purchase, the two forecast offsets, and the
/// three behavioral counts. Categories without a life table fall back to the
/// trivial curves. Curves and fallbacks must come from training data; rows
/// come back sorted by (user_id, category_id).
std::vector<FeatureRow> assemble_feature_matrix(
    const SplitResult& split, const std::map<std::string, SurvivalCurves>& curves_by_category,
    const LabelSet& labels, const ArimaFallbacks& fallbacks, const FeatureConfig& config = {},
    int threads = 1);

/// Mean and sample (n-1) standard deviation per feature over training rows.
NormStats compute_norm_stats(std::span<const FeatureRow> rows);

/// Z-scores every feature with the given stats; scoring reuses training
/// stats unchanged.
std::vector<FeatureRow> normalize(std::span<const FeatureRow> rows, const NormStats& stats);

void write_feature_matrix(const std::string& path, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_feature_matrix(const std::string& path);

void write_norm_stats(const std::string& path, const NormStats& stats);
NormStats read_norm_stats(const std::string& path);

}  // namespace pcic
