#include "pcic/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pcic {

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& truth,
                   int k) {
    if (truth.empty() || k <= 0) return 0.0;
    std::set<std::string> hit;
    const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
        if (truth.count(ranked[i]) != 0) hit.insert(ranked[i]);
    }
    return static_cast<double>(hit.size()) / static_cast<double>(truth.size());
}

double ndcg_at_k(std::span<const std::string> ranked, const std::set<std::string>& truth, int k) {
    if (truth.empty() || k <= 0) return 0.0;
    std::set<std::string> seen;
    double dcg = 0.0;
    const std::size_t limit = std::min(ranked.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
        if (truth.count(ranked[i]) != 0 && seen.insert(ranked[i]).second) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    const std::size_t ideal = std::min(truth.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

MetricSummary summarize(std::span<const double> values) {
    MetricSummary s;
    s.values.assign(values.begin(), values.end());
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
    }
    return s;
}

}  // namespace pcic
