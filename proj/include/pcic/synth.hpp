#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pcic/transactions.hpp"

namespace pcic {

/// Default renewal-gap dispersion: coefficient of variation 1/sqrt(shape).
/// Shoppers keep a personal rhythm rather than buying at memoryless random
/// times, so time since the last purchase predicts the next one.
inline constexpr double kDefaultRenewalShape = 6.0;

/// Generative model: each (user, category) pair is active with probability
/// category_affinity; an active pair draws a personal mean gap from
/// Gamma(gap_shape, gap_scale) and repurchases on a renewal process whose
/// inter-purchase gaps are max(1, round(Gamma(renewal_shape,
/// mean gap / renewal_shape))). renewal_shape = 1 degenerates to a memoryless
/// exponential shopper; larger values make the rhythm tighter. Each purchase
/// picks one of the category's items from a user-specific Zipf preference and
/// buys 1 + Poisson(quantity_mean - 1) units. Same-day purchases of one user
/// share an order. Deterministic per seed, independent of generation order.
struct SynthConfig {
    int n_users = 1000;
    int n_categories = 30;
    int items_per_category = 10;
    int horizon_days = 540;
    double category_affinity = 0.35;
    double gap_shape = 4.0;   // mean-gap distribution: mean 40 days, sd 20
    double gap_scale = 10.0;
    double min_mean_gap = 3.0;
    double renewal_shape = kDefaultRenewalShape;
    double zipf_exponent = 1.2;
    double quantity_mean = 2.0;
    std::string start_date = "2024-01-01";
    std::uint64_t seed = 42;
};

struct SynthResult {
    std::vector<TransactionRecord> records;  // sorted by (date, user, category, item)
    // per active (user, category): the drawn mean gap
    std::map<std::pair<std::string, std::string>, double> truth_mean_gaps;
};

SynthResult generate_synthetic(const SynthConfig& config);

/// Purchase-day offsets (0-based, < horizon_days) for one pair's renewal
/// process. The generator uses this exact process, so the empirical event
/// count is horizon / mean_gap up to edge effects.
std::vector<int> simulate_pair_days(double mean_gap, int horizon_days, std::uint64_t seed,
                                    double renewal_shape = kDefaultRenewalShape);

/// Writes `user_id,category_id,mean_gap` rows for every active pair.
void write_truth_csv(const std::string& path,
                     const std::map<std::pair<std::string, std::string>, double>& truth);

}  // namespace pcic
