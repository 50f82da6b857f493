#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

namespace pcic {

// Fraction of the truth set recovered in the first k entries of ranked.
// Returns 0 when truth is empty; duplicate list entries earn credit once.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& truth,
                   int k);

// Binary-relevance NDCG: DCG over the first k entries with gain 1/log2(pos+1),
// normalized by the ideal DCG of min(|truth|, k) hits. Returns 0 when truth
// is empty.
double ndcg_at_k(std::span<const std::string> ranked, const std::set<std::string>& truth, int k);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 when fewer than 2 values
    std::vector<double> values;
};

MetricSummary summarize(std::span<const double> values);

}  // namespace pcic
