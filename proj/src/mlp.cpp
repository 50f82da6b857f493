#include "pcic/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pcic/util.hpp"

namespace pcic {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Activations {
    std::array<double, kMlpH1> a1{};
    std::array<double, kMlpH2> a2{};
    std::array<double, kMlpOut> p{};
};

Activations forward_cached(const MlpParams& m, const std::array<double, kMlpIn>& x) {
    Activations act;
    for (int i = 0; i < kMlpH1; ++i) {
        double z = m.b1[static_cast<std::size_t>(i)];
        for (int j = 0; j < kMlpIn; ++j) z += m.w1[static_cast<std::size_t>(i * kMlpIn + j)] * x[static_cast<std::size_t>(j)];
        act.a1[static_cast<std::size_t>(i)] = sigmoid(z);
    }
    for (int i = 0; i < kMlpH2; ++i) {
        double z = m.b2[static_cast<std::size_t>(i)];
        for (int j = 0; j < kMlpH1; ++j) z += m.w2[static_cast<std::size_t>(i * kMlpH1 + j)] * act.a1[static_cast<std::size_t>(j)];
        act.a2[static_cast<std::size_t>(i)] = sigmoid(z);
    }
    std::array<double, kMlpOut> z3{};
    for (int i = 0; i < kMlpOut; ++i) {
        double z = m.b3[static_cast<std::size_t>(i)];
        for (int j = 0; j < kMlpH2; ++j) z += m.w3[static_cast<std::size_t>(i * kMlpH2 + j)] * act.a2[static_cast<std::size_t>(j)];
        z3[static_cast<std::size_t>(i)] = z;
    }
    const double zmax = std::max(z3[0], z3[1]);
    const double e0 = std::exp(z3[0] - zmax);
    const double e1 = std::exp(z3[1] - zmax);
    act.p = {e0 / (e0 + e1), e1 / (e0 + e1)};
    return act;
}

// Accumulates sum(w_i * loss_i) and sum(w_i * grad_i), then scales both by
// 1 / sum(w_i): the weighted mean and its exact gradient.
double batch_loss_grad(const MlpParams& m, const std::vector<const FeatureRow*>& batch,
                       double pos_weight, MlpParams* grad) {
    double loss_sum = 0.0;
    double weight_sum = 0.0;
    for (const FeatureRow* row : batch) {
        const Activations act = forward_cached(m, row->x);
        const double w = row->label == 1 ? pos_weight : 1.0;
        const double py = row->label == 1 ? act.p[1] : act.p[0];
        loss_sum += w * -std::log(std::max(py, 1e-300));
        weight_sum += w;
        if (grad == nullptr) continue;

        std::array<double, kMlpOut> dz3 = act.p;
        dz3[static_cast<std::size_t>(row->label)] -= 1.0;
        for (auto& v : dz3) v *= w;

        std::array<double, kMlpH2> da2{};
        for (int i = 0; i < kMlpOut; ++i) {
            for (int j = 0; j < kMlpH2; ++j) {
                grad->w3[static_cast<std::size_t>(i * kMlpH2 + j)] += dz3[static_cast<std::size_t>(i)] * act.a2[static_cast<std::size_t>(j)];
                da2[static_cast<std::size_t>(j)] += m.w3[static_cast<std::size_t>(i * kMlpH2 + j)] * dz3[static_cast<std::size_t>(i)];
            }
            grad->b3[static_cast<std::size_t>(i)] += dz3[static_cast<std::size_t>(i)];
        }
        std::array<double, kMlpH1> da1{};
        for (int i = 0; i < kMlpH2; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const double dz2 = da2[si] * act.a2[si] * (1.0 - act.a2[si]);
            for (int j = 0; j < kMlpH1; ++j) {
                grad->w2[static_cast<std::size_t>(i * kMlpH1 + j)] += dz2 * act.a1[static_cast<std::size_t>(j)];
                da1[static_cast<std::size_t>(j)] += m.w2[static_cast<std::size_t>(i * kMlpH1 + j)] * dz2;
            }
            grad->b2[si] += dz2;
        }
        for (int i = 0; i < kMlpH1; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const double dz1 = da1[si] * act.a1[si] * (1.0 - act.a1[si]);
            for (int j = 0; j < kMlpIn; ++j) {
                grad->w1[static_cast<std::size_t>(i * kMlpIn + j)] += dz1 * row->x[static_cast<std::size_t>(j)];
            }
            grad->b1[si] += dz1;
        }
    }
    if (weight_sum <= 0.0) return 0.0;
    if (grad != nullptr) {
        for (std::size_t i = 0; i < MlpParams::size(); ++i) *grad->data(i) /= weight_sum;
    }
    return loss_sum / weight_sum;
}

void xavier_layer(Rng& rng, double* w, int fan_out, int fan_in) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i) w[i] = (2.0 * rng.uniform() - 1.0) * limit;
}

std::string join_doubles(const double* v, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += format_double(v[i]);
    }
    return out;
}

void parse_doubles(const std::string& text, double* v, std::size_t n, const std::string& what) {
    std::istringstream in(text);
    std::string tok;
    std::size_t i = 0;
    while (in >> tok) {
        if (i >= n || !parse_double(tok, v[i])) throw MlpError("bad model field: " + what);
        ++i;
    }
    if (i != n) throw MlpError("wrong element count for model field: " + what);
}

}  // namespace

double* MlpParams::data(std::size_t i) {
    constexpr std::size_t n1 = kMlpH1 * kMlpIn;
    constexpr std::size_t n2 = n1 + kMlpH1;
    constexpr std::size_t n3 = n2 + kMlpH2 * kMlpH1;
    constexpr std::size_t n4 = n3 + kMlpH2;
    constexpr std::size_t n5 = n4 + kMlpOut * kMlpH2;
    if (i < n1) return &w1[i];
    if (i < n2) return &b1[i - n1];
    if (i < n3) return &w2[i - n2];
    if (i < n4) return &b2[i - n3];
    if (i < n5) return &w3[i - n4];
    return &b3[i - n5];
}

std::size_t MlpParams::size() {
    return static_cast<std::size_t>(kMlpH1 * kMlpIn + kMlpH1 + kMlpH2 * kMlpH1 + kMlpH2 +
                                    kMlpOut * kMlpH2 + kMlpOut);
}

MlpParams init_params(std::uint64_t seed) {
    Rng rng(mix_seed(seed, fnv1a64("mlp-init")));
    MlpParams m;
    xavier_layer(rng, m.w1.data(), kMlpH1, kMlpIn);
    xavier_layer(rng, m.w2.data(), kMlpH2, kMlpH1);
    xavier_layer(rng, m.w3.data(), kMlpOut, kMlpH2);
    return m;
}

std::array<double, kMlpOut> mlp_forward(const MlpParams& params,
                                        const std::array<double, kFeatureCount>& x) {
    return forward_cached(params, x).p;
}

double mlp_loss_and_grad(const MlpParams& params, std::span<const FeatureRow> rows,
                         double pos_weight, MlpParams& grad) {
    grad = MlpParams{};
    std::vector<const FeatureRow*> batch;
    batch.reserve(rows.size());
    for (const auto& row : rows) batch.push_back(&row);
    return batch_loss_grad(params, batch, pos_weight, &grad);
}

double mlp_loss(const MlpParams& params, std::span<const FeatureRow> rows, double pos_weight) {
    std::vector<const FeatureRow*> batch;
    batch.reserve(rows.size());
    for (const auto& row : rows) batch.push_back(&row);
    return batch_loss_grad(params, batch, pos_weight, nullptr);
}

TrainResult train_pc_model(std::span<const FeatureRow> train_rows,
                           std::span<const FeatureRow> val_rows, const TrainConfig& config) {
    if (train_rows.empty()) throw MlpError("cannot train on zero rows");
    if (config.optimizer != "adam" && config.optimizer != "sgd") {
        throw MlpError("unknown optimizer: " + config.optimizer);
    }
    if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1) {
        throw MlpError("batch_size, max_epochs and patience must be positive");
    }

    std::size_t pos = 0;
    for (const auto& row : train_rows) pos += row.label == 1 ? 1u : 0u;
    const std::size_t neg = train_rows.size() - pos;
    if (pos == 0 || neg == 0) {
        throw MlpError("training rows contain a single class; nothing to separate");
    }
    double pos_weight = config.pos_weight;
    if (pos_weight <= 0.0) {
        pos_weight = static_cast<double>(neg) / static_cast<double>(pos);
    }

    const NormStats stats = compute_norm_stats(train_rows);
    const std::vector<FeatureRow> train = normalize(train_rows, stats);
    const std::vector<FeatureRow> val = normalize(val_rows, stats);

    MlpParams params = init_params(config.seed);
    std::vector<double> adam_m(MlpParams::size(), 0.0);
    std::vector<double> adam_v(MlpParams::size(), 0.0);
    std::int64_t adam_t = 0;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(mix_seed(config.seed, fnv1a64("mlp-shuffle")));

    TrainResult result;
    MlpParams best_params = params;
    double best_signal = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;
    MlpParams grad;
    std::vector<const FeatureRow*> batch;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(&train[order[i]]);
            grad = MlpParams{};
            const double loss = batch_loss_grad(params, batch, pos_weight, &grad);
            if (!std::isfinite(loss)) throw MlpError("training diverged: non-finite batch loss");
            if (config.optimizer == "adam") {
                ++adam_t;
                const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam_t));
                const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam_t));
                for (std::size_t i = 0; i < MlpParams::size(); ++i) {
                    const double g = *grad.data(i);
                    adam_m[i] = config.adam_beta1 * adam_m[i] + (1.0 - config.adam_beta1) * g;
                    adam_v[i] = config.adam_beta2 * adam_v[i] + (1.0 - config.adam_beta2) * g * g;
                    *params.data(i) -= config.learning_rate * (adam_m[i] / c1) /
                                       (std::sqrt(adam_v[i] / c2) + config.adam_eps);
                }
            } else {
                for (std::size_t i = 0; i < MlpParams::size(); ++i) {
                    *params.data(i) -= config.learning_rate * *grad.data(i);
                }
            }
        }
        const double train_loss = mlp_loss(params, train, pos_weight);
        // Validation drives early stopping; without a validation split the
        // training loss stands in.
        const double val_loss = val.empty() ? train_loss : mlp_loss(params, val, pos_weight);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            throw MlpError("training diverged: non-finite epoch loss");
        }
        result.train_loss.push_back(train_loss);
        result.val_loss.push_back(val_loss);
        result.epochs_run = epoch;
        if (val_loss < best_signal) {
            best_signal = val_loss;
            best_params = params;
            result.best_epoch = epoch;
            bad_epochs = 0;
        } else if (++bad_epochs >= config.patience) {
            break;
        }
    }

    result.model.params = best_params;
    result.model.stats = stats;
    result.model.pos_weight = pos_weight;
    return result;
}

double predict_p1(const PcModel& model, const FeatureRow& raw_row) {
    std::array<double, kFeatureCount> x{};
    for (int f = 0; f < kFeatureCount; ++f) {
        const auto i = static_cast<std::size_t>(f);
        x[i] = (raw_row.x[i] - model.stats.mean[i]) / model.stats.stddev[i];
    }
    return mlp_forward(model.params, x)[1];
}

std::vector<PcScore> score_categories(const PcModel& model, std::span<const FeatureRow> rows) {
    std::vector<PcScore> out;
    out.reserve(rows.size());
    // Scores carry the raw purchase count alongside for tie-breaking;
    // gathered per user group, ranked, then appended.
    struct Scored {
        double score;
        double num_purchases;
        const FeatureRow* row;
    };
    std::vector<Scored> group;
    auto emit_group = [&]() {
        std::sort(group.begin(), group.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.num_purchases != b.num_purchases) return a.num_purchases > b.num_purchases;
            return a.row->category_id < b.row->category_id;
        });
        for (std::size_t i = 0; i < group.size(); ++i) {
            out.push_back(PcScore{group[i].row->user_id, group[i].row->category_id,
                                  group[i].score, static_cast<int>(i) + 1});
        }
        group.clear();
    };
    for (const auto& row : rows) {
        if (!group.empty() && group.back().row->user_id != row.user_id) emit_group();
        group.push_back(Scored{predict_p1(model, row), row.x[8], &row});
    }
    if (!group.empty()) emit_group();
    return out;
}

ImportanceReport permutation_importance(const PcModel& model, std::span<const FeatureRow> raw_rows,
                                        int repeats, std::uint64_t seed) {
    if (raw_rows.empty()) throw MlpError("cannot compute importance on zero rows");
    if (repeats < 1) throw MlpError("importance repeats must be positive");
    std::vector<FeatureRow> rows = normalize(raw_rows, model.stats);
    ImportanceReport report;
    report.base_loss = mlp_loss(model.params, rows, model.pos_weight);
    std::vector<std::size_t> perm(rows.size());
    std::vector<double> column(rows.size());
    for (int r = 0; r < repeats; ++r) {
        std::array<double, kFeatureCount> increase{};
        for (int f = 0; f < kFeatureCount; ++f) {
            const auto fi = static_cast<std::size_t>(f);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                perm[i] = i;
                column[i] = rows[i].x[fi];
            }
            Rng rng(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(r)),
                             fnv1a64(kFeatureNames[fi])));
            shuffle_indices(perm, rng);
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i].x[fi] = column[perm[i]];
            increase[fi] = mlp_loss(model.params, rows, model.pos_weight) - report.base_loss;
            for (std::size_t i = 0; i < rows.size(); ++i) rows[i].x[fi] = column[i];
        }
        report.per_repeat.push_back(increase);
        for (int f = 0; f < kFeatureCount; ++f) {
            report.mean_increase[static_cast<std::size_t>(f)] += increase[static_cast<std::size_t>(f)];
        }
    }
    for (auto& v : report.mean_increase) v /= static_cast<double>(repeats);
    return report;
}

void write_pc_model(const std::string& path, const PcModel& model) {
    std::ofstream out(path);
    if (!out) throw MlpError("cannot write model: " + path);
    out << "model = pc-mlp-v1\n"
        << "schema = " << model.schema << "\n"
        << "pos_weight = " << format_double(model.pos_weight) << "\n"
        << "mean = " << join_doubles(model.stats.mean.data(), model.stats.mean.size()) << "\n"
        << "std = " << join_doubles(model.stats.stddev.data(), model.stats.stddev.size()) << "\n"
        << "w1 = " << join_doubles(model.params.w1.data(), model.params.w1.size()) << "\n"
        << "b1 = " << join_doubles(model.params.b1.data(), model.params.b1.size()) << "\n"
        << "w2 = " << join_doubles(model.params.w2.data(), model.params.w2.size()) << "\n"
        << "b2 = " << join_doubles(model.params.b2.data(), model.params.b2.size()) << "\n"
        << "w3 = " << join_doubles(model.params.w3.data(), model.params.w3.size()) << "\n"
        << "b3 = " << join_doubles(model.params.b3.data(), model.params.b3.size()) << "\n";
}

PcModel read_pc_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MlpError("cannot open model: " + path);
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
    if (kv["model"] != "pc-mlp-v1") throw MlpError("unsupported model format in " + path);
    if (kv["schema"] != kFeatureSchemaVersion) {
        throw MlpError("model feature schema mismatch in " + path);
    }
    PcModel model;
    model.schema = kv["schema"];
    if (!parse_double(kv["pos_weight"], model.pos_weight)) {
        throw MlpError("bad model field: pos_weight");
    }
    parse_doubles(kv["mean"], model.stats.mean.data(), model.stats.mean.size(), "mean");
    parse_doubles(kv["std"], model.stats.stddev.data(), model.stats.stddev.size(), "std");
    parse_doubles(kv["w1"], model.params.w1.data(), model.params.w1.size(), "w1");
    parse_doubles(kv["b1"], model.params.b1.data(), model.params.b1.size(), "b1");
    parse_doubles(kv["w2"], model.params.w2.data(), model.params.w2.size(), "w2");
    parse_doubles(kv["b2"], model.params.b2.data(), model.params.b2.size(), "b2");
    parse_doubles(kv["w3"], model.params.w3.data(), model.params.w3.size(), "w3");
    parse_doubles(kv["b3"], model.params.b3.data(), model.params.b3.size(), "b3");
    return model;
}

}  // namespace pcic
