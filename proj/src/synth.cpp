#include "pcic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pcic/csv.hpp"
#include "pcic/dates.hpp"
#include "pcic/util.hpp"

namespace pcic {

namespace {

std::string padded_id(const std::string& prefix, int index, int count) {
    int width = 1;
    for (int v = count; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    return prefix + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(width, digits.size()), '0') + digits;
}

// Renewal process: uniform phase then gamma gaps with mean mean_gap and
// shape renewal_shape, rounded to whole days, never shorter than one day.
std::vector<int> generate_days(Rng& rng, double mean_gap, int horizon_days,
                               double renewal_shape) {
    std::vector<int> days;
    double t = rng.uniform() * mean_gap;
    while (t < horizon_days) {
        days.push_back(static_cast<int>(t));
        const double gap =
            std::max(1.0, std::round(rng.gamma(renewal_shape, mean_gap / renewal_shape)));
        t += gap;
    }
    return days;
}

}  // namespace

std::vector<int> simulate_pair_days(double mean_gap, int horizon_days, std::uint64_t seed,
                                    double renewal_shape) {
    Rng rng(seed);
    return generate_days(rng, mean_gap, horizon_days, renewal_shape);
}

SynthResult generate_synthetic(const SynthConfig& config) {
    if (config.n_users < 1 || config.n_categories < 1 || config.items_per_category < 1 ||
        config.horizon_days < 1) {
        throw std::invalid_argument("synthetic generator sizes must be positive");
    }
    if (config.renewal_shape <= 0.0) {
        throw std::invalid_argument("synth renewal_shape must be positive");
    }
    const auto start_parsed = parse_date(config.start_date);
    if (!start_parsed) {
        throw std::invalid_argument("bad synth start date: " + config.start_date);
    }
    const Date start = *start_parsed;

    // Zipf preference over item slots; each user permutes the slots so
    // favorites are personal rather than global.
    std::vector<double> zipf_cdf(static_cast<std::size_t>(config.items_per_category));
    {
        double total = 0.0;
        for (int i = 0; i < config.items_per_category; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i) + 1.0, config.zipf_exponent);
            zipf_cdf[static_cast<std::size_t>(i)] = total;
        }
        for (auto& v : zipf_cdf) v /= total;
    }

    SynthResult result;
    for (int u = 0; u < config.n_users; ++u) {
        const std::string user_id = padded_id("u", u, config.n_users);
        for (int c = 0; c < config.n_categories; ++c) {
            const std::string category_id = padded_id("c", c, config.n_categories);
            // One substream per pair, salted by ids: reproducible regardless
            // of loop structure or parallelism.
            Rng rng(mix_seed(config.seed, fnv1a64(user_id + "\x1f" + category_id)));
            if (rng.uniform() >= config.category_affinity) continue;
            const double mean_gap =
                std::max(config.min_mean_gap, rng.gamma(config.gap_shape, config.gap_scale));
            result.truth_mean_gaps[{user_id, category_id}] = mean_gap;

            std::vector<std::size_t> item_perm(static_cast<std::size_t>(config.items_per_category));
            for (std::size_t i = 0; i < item_perm.size(); ++i) item_perm[i] = i;
            shuffle_indices(item_perm, rng);

            const std::vector<int> days =
                generate_days(rng, mean_gap, config.horizon_days, config.renewal_shape);
            for (int day : days) {
                const double pick = rng.uniform();
                std::size_t slot = 0;
                while (slot + 1 < zipf_cdf.size() && pick >= zipf_cdf[slot]) ++slot;
                const int item_index = static_cast<int>(item_perm[slot]);
                TransactionRecord rec;
                rec.user_id = user_id;
                rec.order_date = start + day;
                rec.order_id = user_id + "-" + format_date(rec.order_date);
                rec.category_id = category_id;
                rec.item_id =
                    category_id + "-" + padded_id("i", item_index, config.items_per_category);
                rec.quantity = 1.0 + rng.poisson(config.quantity_mean - 1.0);
                result.records.push_back(std::move(rec));
            }
        }
    }
    std::sort(result.records.begin(), result.records.end(),
              [](const TransactionRecord& a, const TransactionRecord& b) {
                  if (a.order_date != b.order_date) return a.order_date < b.order_date;
                  if (a.user_id != b.user_id) return a.user_id < b.user_id;
                  if (a.category_id != b.category_id) return a.category_id < b.category_id;
                  return a.item_id < b.item_id;
              });
    return result;
}

void write_truth_csv(const std::string& path,
                     const std::map<std::pair<std::string, std::string>, double>& truth) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write truth file: " + path);
    out << "user_id,category_id,mean_gap\n";
    for (const auto& [key, gap] : truth) {
        out << csv_escape(key.first) << ',' << csv_escape(key.second) << ','
            << format_double(gap) << '\n';
    }
}

}  // namespace pcic
