#pragma once

#include <optional>
#include <span>
#include <vector>

namespace pcic {

struct ArimaOrder {
    int p = 0;  // autoregressive order, <= 3
    int d = 0;  // differencing degree, <= 3
    int q = 0;  // moving-average order, fixed 0 (pure AR on differences)
};

/// A fitted AR(p) model on the d-times-differenced series, estimated by
/// conditional least squares. With q = 0 the fit is a single linear solve, so
/// millions of per-(user, category) fits stay cheap and deterministic.
struct ArimaFit {
    ArimaOrder order;
    std::vector<double> ar_coefficients;  // size p
    double intercept = 0.0;
    double residual_variance = 0.0;
    double aic = 0.0;
    int n_obs = 0;       // original series length
    int n_residuals = 0; // rows entering the least-squares fit
    double forecast = 0.0;  // one-step forecast on the original scale
};

/// Fits one (p, d) candidate. Returns nullopt when the regression is
/// singular or the series is too short for the order.
std::optional<ArimaFit> fit_arima_candidate(std::span<const double> series, int p, int d);

/// Grid search over p in 0..3, d in 0..3, q = 0 with p + d < n; winner is the
/// minimum AIC, where AIC = n_residuals * ln(residual_variance) + 2 * (p + 2).
/// Ties keep the smaller d, then the smaller p. Returns nullopt when the
/// series has fewer than 4 points or every candidate is singular; callers
/// fall back to mean/median predictions.
std::optional<ArimaFit> fit_arima(std::span<const double> series);

double mean_of(std::span<const double> values);
double median_of(std::vector<double> values);  // by value: partially sorts

/// ARIMA(date) feature: predicted next inter-purchase gap minus days since
/// the last purchase. Positive = purchase still ahead, negative = overdue.
/// Fallbacks: mean gap when fewer than 4 gaps, category_median_gap when the
/// user has no completed gap. Clamped to [-feature_cap, feature_cap].
double forecast_gap_feature(std::span<const double> gaps, double days_since_last,
                            double category_median_gap, double feature_cap = 365.0);

/// ARIMA(rate) feature: forecast consumption rate from per-interval rates
/// quantity_i / gap_i, convert the last purchased quantity into days until
/// depletion, and subtract days since last purchase. Same fallback ladder
/// with category_median_rate; rates are floored at 1e-6 before dividing.
double forecast_depletion_feature(std::span<const double> quantities, std::span<const double> gaps,
                                  double days_since_last, double category_median_rate,
                                  double feature_cap = 365.0);

}  // namespace pcic
