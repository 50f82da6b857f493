#include "pcic/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "pcic/arima.hpp"
#include "pcic/csv.hpp"
#include "pcic/util.hpp"

namespace pcic {

namespace {

int trips_since_last_purchase(const UserHistory& user, const std::string& category_id) {
    int last_index = -1;
    for (int i = 0; i < static_cast<int>(user.baskets.size()); ++i) {
        const auto& items = user.baskets[static_cast<std::size_t>(i)].items;
        const bool contains = std::any_of(items.begin(), items.end(), [&](const BasketItem& it) {
            return it.category_id == category_id;
        });
        if (contains) last_index = i;
    }
    return last_index < 0 ? 0 : static_cast<int>(user.baskets.size()) - 1 - last_index;
}

}  // namespace

double ArimaFallbacks::gap_for(const std::string& category_id) const {
    auto it = median_gap.find(category_id);
    return it != median_gap.end() ? it->second : global_median_gap;
}

double ArimaFallbacks::rate_for(const std::string& category_id) const {
    auto it = median_rate.find(category_id);
    return it != median_rate.end() ? it->second : global_median_rate;
}

ArimaFallbacks compute_arima_fallbacks(std::span<const UserHistory> feature_histories) {
    std::map<std::string, std::vector<double>> gaps_by_cat;
    std::map<std::string, std::vector<double>> rates_by_cat;
    std::vector<double> all_gaps;
    std::vector<double> all_rates;
    for (const auto& user : feature_histories) {
        for (const auto& [category_id, events] : per_category_events(user)) {
            auto& gaps = gaps_by_cat[category_id];
            auto& rates = rates_by_cat[category_id];
            for (std::size_t i = 1; i < events.size(); ++i) {
                const double gap = static_cast<double>(events[i].date - events[i - 1].date);
                gaps.push_back(gap);
                all_gaps.push_back(gap);
                const double rate = events[i - 1].quantity / std::max(gap, 1e-9);
                rates.push_back(rate);
                all_rates.push_back(rate);
            }
        }
    }
    ArimaFallbacks out;
    out.global_median_gap = median_of(all_gaps);
    out.global_median_rate = median_of(all_rates);
    for (auto& [category_id, gaps] : gaps_by_cat) {
        out.median_gap[category_id] = gaps.empty() ? out.global_median_gap : median_of(gaps);
        auto& rates = rates_by_cat[category_id];
        out.median_rate[category_id] = rates.empty() ? out.global_median_rate : median_of(rates);
    }
    return out;
}

std::vector<FeatureRow> assemble_feature_matrix(
    const SplitResult& split, const std::map<std::string, SurvivalCurves>& curves_by_category,
    const LabelSet& labels, const ArimaFallbacks& fallbacks, const FeatureConfig& config,
    int threads) {
    std::unordered_map<std::string, const UserHistory*> history_by_user;
    history_by_user.reserve(split.feature_histories.size());
    for (const auto& user : split.feature_histories) history_by_user[user.user_id] = &user;

    const SurvivalCurves trivial = trivial_curves();

    // Group label keys per user, preserving (user, category) order.
    struct Work {
        const UserHistory* user = nullptr;
        std::vector<std::pair<std::string, int>> categories;  // (category, label)
        std::size_t row_offset = 0;
    };
    std::vector<Work> work;
    for (const auto& [key, label] : labels.labels) {
        const auto& [user_id, category_id] = key;
        auto it = history_by_user.find(user_id);
        if (it == history_by_user.end()) {
            throw FeatureError("label references user absent from feature histories: " + user_id);
        }
        if (work.empty() || work.back().user->user_id != user_id) {
            work.push_back(Work{it->second, {}, 0});
        }
        work.back().categories.emplace_back(category_id, label);
    }
    std::size_t total = 0;
    for (auto& w : work) {
        w.row_offset = total;
        total += w.categories.size();
    }

    std::vector<FeatureRow> rows(total);
    parallel_for(work.size(), threads, [&](std::size_t wi) {
        const Work& w = work[wi];
        const UserHistory& user = *w.user;
        const Date today = split.reference_date(user.user_id) - 1;
        const auto events_by_category = per_category_events(user);
        for (std::size_t ci = 0; ci < w.categories.size(); ++ci) {
            const auto& [category_id, label] = w.categories[ci];
            const auto& events = events_by_category.at(category_id);
            const int days_since_last = static_cast<int>(today - events.back().date);

            std::vector<double> gaps(events.size() > 1 ? events.size() - 1 : 0);
            std::vector<double> quantities(events.size());
            for (std::size_t i = 0; i < events.size(); ++i) {
                quantities[i] = events[i].quantity;
                if (i > 0) gaps[i - 1] = static_cast<double>(events[i].date - events[i - 1].date);
            }

            auto curves_it = curves_by_category.find(category_id);
            const SurvivalCurves& curves =
                curves_it != curves_by_category.end() ? curves_it->second : trivial;
            const auto surv = survival_features(curves, days_since_last);

            FeatureRow row;
            row.user_id = user.user_id;
            row.category_id = category_id;
            row.label = label;
            for (int f = 0; f < 6; ++f) row.x[static_cast<std::size_t>(f)] = surv[static_cast<std::size_t>(f)];
            row.x[6] = forecast_gap_feature(gaps, days_since_last, fallbacks.gap_for(category_id),
                                            config.arima_feature_cap);
            row.x[7] = forecast_depletion_feature(quantities, gaps, days_since_last,
                                                  fallbacks.rate_for(category_id),
                                                  config.arima_feature_cap);
            row.x[8] = static_cast<double>(events.size());
            row.x[9] = trips_since_last_purchase(user, category_id);
            row.x[10] = days_since_last;
            for (double v : row.x) {
                if (!std::isfinite(v)) {
                    throw FeatureError("non-finite feature for (" + user.user_id + ", " +
                                       category_id + ")");
                }
            }
            rows[w.row_offset + ci] = std::move(row);
        }
    });
    return rows;
}

NormStats compute_norm_stats(std::span<const FeatureRow> rows) {
    if (rows.empty()) throw FeatureError("cannot compute normalization stats on zero rows");
    NormStats stats;
    const double n = static_cast<double>(rows.size());
    for (const auto& row : rows) {
        for (int f = 0; f < kFeatureCount; ++f) stats.mean[static_cast<std::size_t>(f)] += row.x[static_cast<std::size_t>(f)];
    }
    for (auto& m : stats.mean) m /= n;
    std::array<double, kFeatureCount> ss{};
    for (const auto& row : rows) {
        for (int f = 0; f < kFeatureCount; ++f) {
            const auto i = static_cast<std::size_t>(f);
            const double d = row.x[i] - stats.mean[i];
            ss[i] += d * d;
        }
    }
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto i = static_cast<std::size_t>(f);
        const double var = rows.size() > 1 ? ss[i] / (n - 1.0) : 0.0;
        stats.stddev[i] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return stats;
}

std::vector<FeatureRow> normalize(std::span<const FeatureRow> rows, const NormStats& stats) {
    std::vector<FeatureRow> out(rows.begin(), rows.end());
    for (auto& row : out) {
        for (int f = 0; f < kFeatureCount; ++f) {
            const auto i = static_cast<std::size_t>(f);
            row.x[i] = (row.x[i] - stats.mean[i]) / stats.stddev[i];
        }
    }
    return out;
}

void write_feature_matrix(const std::string& path, std::span<const FeatureRow> rows) {
    std::ofstream out(path);
    if (!out) throw FeatureError("cannot write feature matrix: " + path);
    out << "user_id,category_id";
    for (int f = 1; f <= kFeatureCount; ++f) out << ",f" << f;
    out << ",label\n";
    for (const auto& row : rows) {
        out << csv_escape(row.user_id) << ',' << csv_escape(row.category_id);
        for (double v : row.x) out << ',' << format_double(v);
        out << ',' << row.label << '\n';
    }
}

std::vector<FeatureRow> read_feature_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FeatureError("cannot open feature matrix: " + path);
    std::string line;
    if (!read_csv_line(in, line, true)) throw FeatureError("empty feature matrix: " + path);
    std::string expected = "user_id,category_id";
    for (int f = 1; f <= kFeatureCount; ++f) expected += ",f" + std::to_string(f);
    expected += ",label";
    if (line != expected) throw FeatureError("unexpected feature matrix header in " + path);
    std::vector<FeatureRow> rows;
    while (read_csv_line(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2 + kFeatureCount + 1) {
            throw FeatureError("malformed feature row in " + path);
        }
        FeatureRow row;
        row.user_id = fields[0];
        row.category_id = fields[1];
        for (int f = 0; f < kFeatureCount; ++f) {
            if (!parse_double(fields[static_cast<std::size_t>(2 + f)], row.x[static_cast<std::size_t>(f)])) {
                throw FeatureError("bad feature value in " + path);
            }
        }
        std::int64_t label = 0;
        if (!parse_int64(fields.back(), label) || (label != 0 && label != 1)) {
            throw FeatureError("bad label in " + path);
        }
        row.label = static_cast<int>(label);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_norm_stats(const std::string& path, const NormStats& stats) {
    std::ofstream out(path);
    if (!out) throw FeatureError("cannot write normalization stats: " + path);
    out << "schema = " << kFeatureSchemaVersion << "\n";
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto i = static_cast<std::size_t>(f);
        out << "mean." << kFeatureNames[i] << " = " << format_double(stats.mean[i]) << "\n"
            << "std." << kFeatureNames[i] << " = " << format_double(stats.stddev[i]) << "\n";
    }
}

NormStats read_norm_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FeatureError("cannot open normalization stats: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (kv["schema"] != kFeatureSchemaVersion) {
        throw FeatureError("normalization stats schema mismatch in " + path);
    }
    NormStats stats;
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto i = static_cast<std::size_t>(f);
        const std::string name = kFeatureNames[i];
        if (!parse_double(kv["mean." + name], stats.mean[i]) ||
            !parse_double(kv["std." + name], stats.stddev[i])) {
            throw FeatureError("missing stat for feature " + name + " in " + path);
        }
    }
    return stats;
}

}  // namespace pcic
