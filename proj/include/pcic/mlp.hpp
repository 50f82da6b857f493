#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/features.hpp"

namespace pcic {

class MlpError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Fixed topology: 11 inputs, two sigmoid hidden layers (10 and 5 units),
// 2-way softmax output. Class 1 is "will repurchase".
inline constexpr int kMlpIn = kFeatureCount;
inline constexpr int kMlpH1 = 10;
inline constexpr int kMlpH2 = 5;
inline constexpr int kMlpOut = 2;

struct MlpParams {
    std::array<double, kMlpH1 * kMlpIn> w1{};
    std::array<double, kMlpH1> b1{};
    std::array<double, kMlpH2 * kMlpH1> w2{};
    std::array<double, kMlpH2> b2{};
    std::array<double, kMlpOut * kMlpH2> w3{};
    std::array<double, kMlpOut> b3{};

    double* data(std::size_t i);
    static std::size_t size();
};

// Xavier-uniform initialization, deterministic in the seed.
MlpParams init_params(std::uint64_t seed);

// Forward pass on an already-normalized feature vector; returns the softmax
// pair {p0, p1}.
std::array<double, kMlpOut> mlp_forward(const MlpParams& params,
                                        const std::array<double, kFeatureCount>& x);

// Weighted cross-entropy over a batch of normalized rows: rows with label 1
// carry weight pos_weight, rows with label 0 weight 1. Returns the weighted
// mean loss and accumulates the gradient of that mean into grad.
double mlp_loss_and_grad(const MlpParams& params, std::span<const FeatureRow> rows,
                         double pos_weight, MlpParams& grad);

// Loss only (validation); same weighting as mlp_loss_and_grad.
double mlp_loss(const MlpParams& params, std::span<const FeatureRow> rows, double pos_weight);

struct TrainConfig {
    int max_epochs = 50;
    int patience = 5;       // epochs without validation improvement before stopping
    int batch_size = 256;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";  // "adam" or "sgd"
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double pos_weight = 0.0;  // <= 0 selects n_negative / n_positive from the training rows
    std::uint64_t seed = 42;
};

// Trained category model: network weights plus the normalization statistics
// of its training matrix. predict_p1 normalizes internally, so callers always
// pass raw feature rows.
struct PcModel {
    MlpParams params;
    NormStats stats;
    double pos_weight = 1.0;
    std::string schema = kFeatureSchemaVersion;
};

struct TrainResult {
    PcModel model;
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;    // per epoch
    int best_epoch = 0;              // epoch whose weights the model carries
    int epochs_run = 0;
};

// Trains on raw rows: computes normalization stats from train_rows, embeds
// them in the model, early-stops on validation loss. Training is
// single-threaded and bit-deterministic for a given seed and config.
// Throws MlpError if the loss turns non-finite or inputs are empty.
TrainResult train_pc_model(std::span<const FeatureRow> train_rows,
                           std::span<const FeatureRow> val_rows, const TrainConfig& config);

double predict_p1(const PcModel& model, const FeatureRow& raw_row);

struct PcScore {
    std::string user_id;
    std::string category_id;
    double score = 0.0;  // softmax probability of repurchase
    int rank = 0;        // 1-based within the user
};

// Scores raw rows and ranks categories per user: score descending, then
// raw purchase count descending, then category_id ascending. Input rows must
// be grouped by user (the natural matrix order).
std::vector<PcScore> score_categories(const PcModel& model, std::span<const FeatureRow> rows);

struct ImportanceReport {
    // increase in validation loss when the feature column is shuffled,
    // mean over repeats and the individual repeat values
    std::array<double, kFeatureCount> mean_increase{};
    std::vector<std::array<double, kFeatureCount>> per_repeat;
    double base_loss = 0.0;
};

ImportanceReport permutation_importance(const PcModel& model, std::span<const FeatureRow> raw_rows,
                                        int repeats, std::uint64_t seed);

void write_pc_model(const std::string& path, const PcModel& model);
PcModel read_pc_model(const std::string& path);

}  // namespace pcic
