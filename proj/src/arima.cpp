#include "pcic/arima.hpp"

#include <algorithm>
#include <cmath>

namespace pcic {

namespace {

constexpr double kVarianceFloor = 1e-30;

// Solves A x = b (n <= 4) by Gaussian elimination with partial pivoting.
// Returns false when a pivot is negligible relative to the matrix scale.
bool solve_normal_equations(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    double scale = 0.0;
    for (const auto& row : a) {
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-10 * scale) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t c = i + 1; c < n; ++c) sum -= a[i][c] * b[c];
        b[i] = sum / a[i][i];
    }
    return true;
}

}  // namespace

std::optional<ArimaFit> fit_arima_candidate(std::span<const double> series, int p, int d) {
    const int n = static_cast<int>(series.size());
    if (p < 0 || d < 0 || p + d >= n) return std::nullopt;

    // Difference d times, keeping the tail of every level for re-integration.
    std::vector<double> w(series.begin(), series.end());
    std::vector<double> tails;
    tails.reserve(static_cast<std::size_t>(d));
    for (int level = 0; level < d; ++level) {
        tails.push_back(w.back());
        for (std::size_t t = w.size() - 1; t > 0; --t) w[t] -= w[t - 1];
        w.erase(w.begin());
    }
    const int nw = static_cast<int>(w.size());
    const int n_res = nw - p;
    if (n_res < 1) return std::nullopt;

    // Conditional least squares: w_t = c + sum_i phi_i * w_{t-i}.
    const std::size_t dim = static_cast<std::size_t>(p) + 1;
    std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
    std::vector<double> xty(dim, 0.0);
    auto regressor = [&](int t, std::size_t j) -> double {
        return j == 0 ? 1.0 : w[static_cast<std::size_t>(t) - j];
    };
    for (int t = p; t < nw; ++t) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double xi = regressor(t, i);
            xty[i] += xi * w[static_cast<std::size_t>(t)];
            for (std::size_t j = i; j < dim; ++j) xtx[i][j] += xi * regressor(t, j);
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) xtx[i][j] = xtx[j][i];
    }
    std::vector<double> beta = xty;
    if (!solve_normal_equations(xtx, beta)) return std::nullopt;

    double sse = 0.0;
    for (int t = p; t < nw; ++t) {
        double fitted = beta[0];
        for (int i = 1; i <= p; ++i) {
            fitted += beta[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(t - i)];
        }
        const double r = w[static_cast<std::size_t>(t)] - fitted;
        sse += r * r;
    }

    ArimaFit fit;
    fit.order = {p, d, 0};
    fit.intercept = beta[0];
    fit.ar_coefficients.assign(beta.begin() + 1, beta.end());
    fit.n_obs = n;
    fit.n_residuals = n_res;
    fit.residual_variance = sse / n_res;
    fit.aic = n_res * std::log(std::max(fit.residual_variance, kVarianceFloor)) + 2.0 * (p + 2);

    // One-step forecast of the differenced series, then integrate back up.
    double wf = beta[0];
    for (int i = 1; i <= p; ++i) {
        wf += beta[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(nw - i)];
    }
    for (double tail : tails) wf += tail;
    fit.forecast = wf;
    if (!std::isfinite(fit.forecast) || !std::isfinite(fit.aic)) return std::nullopt;
    return fit;
}

std::optional<ArimaFit> fit_arima(std::span<const double> series) {
    if (series.size() < 4) return std::nullopt;
    std::optional<ArimaFit> best;
    for (int d = 0; d <= 3; ++d) {
        for (int p = 0; p <= 3; ++p) {
            auto candidate = fit_arima_candidate(series, p, d);
            if (!candidate) continue;
            if (!best || candidate->aic < best->aic) best = std::move(candidate);
        }
    }
    return best;
}

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    if (values.size() % 2 == 1) return values[mid];
    const double hi = values[mid];
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

namespace {

double clamp_feature(double value, double cap) { return std::clamp(value, -cap, cap); }

double predict_series(std::span<const double> series, double fallback_when_empty) {
    if (series.empty()) return fallback_when_empty;
    if (series.size() < 4) return mean_of(series);
    if (auto fit = fit_arima(series)) return fit->forecast;
    return mean_of(series);
}

}  // namespace

double forecast_gap_feature(std::span<const double> gaps, double days_since_last,
                            double category_median_gap, double feature_cap) {
    const double predicted_gap = predict_series(gaps, category_median_gap);
    return clamp_feature(predicted_gap - days_since_last, feature_cap);
}

double forecast_depletion_feature(std::span<const double> quantities, std::span<const double> gaps,
                                  double days_since_last, double category_median_rate,
                                  double feature_cap) {
    const std::size_t intervals =
        quantities.empty() ? 0 : std::min(gaps.size(), quantities.size() - 1);
    std::vector<double> rates(intervals);
    for (std::size_t i = 0; i < intervals; ++i) {
        rates[i] = quantities[i] / std::max(gaps[i], 1e-9);
    }
    const double predicted_rate = predict_series(rates, category_median_rate);
    const double last_quantity = quantities.empty() ? 0.0 : quantities.back();
    const double depletion_days = last_quantity / std::max(predicted_rate, 1e-6);
    return clamp_feature(depletion_days - days_since_last, feature_cap);
}

}  // namespace pcic
