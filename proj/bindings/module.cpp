#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/arima.hpp"
#include "pcic/config.hpp"
#include "pcic/features.hpp"
#include "pcic/icrank.hpp"
#include "pcic/metrics.hpp"
#include "pcic/mlp.hpp"
#include "pcic/pipeline.hpp"
#include "pcic/survival.hpp"
#include "pcic/synth.hpp"

namespace py = pybind11;

namespace {

// Rebuilds a life table from raw gap observations. The risk set at day k is
// every observation (event or censored) whose gap is >= k, so it falls out
// of a suffix sum over the per-day counts.
pcic::LifeTable table_from_gaps(const std::vector<int>& event_gaps,
                                const std::vector<int>& censor_gaps) {
    int k_max = 0;
    for (int g : event_gaps) {
        if (g < 0) throw std::invalid_argument("event gaps must be >= 0");
        k_max = std::max(k_max, g);
    }
    for (int g : censor_gaps) {
        if (g < 0) throw std::invalid_argument("censor gaps must be >= 0");
        k_max = std::max(k_max, g);
    }
    if (event_gaps.empty() && censor_gaps.empty()) {
        throw std::invalid_argument("no observations");
    }
    pcic::LifeTable table;
    table.n_event.assign(static_cast<std::size_t>(k_max) + 1, 0);
    table.n_censor.assign(static_cast<std::size_t>(k_max) + 1, 0);
    table.n_risk.assign(static_cast<std::size_t>(k_max) + 1, 0);
    for (int g : event_gaps) ++table.n_event[static_cast<std::size_t>(g)];
    for (int g : censor_gaps) ++table.n_censor[static_cast<std::size_t>(g)];
    std::int64_t at_risk = 0;
    for (int k = k_max; k >= 0; --k) {
        const auto idx = static_cast<std::size_t>(k);
        at_risk += table.n_event[idx] + table.n_censor[idx];
        table.n_risk[idx] = at_risk;
    }
    table.n_total = at_risk;
    return table;
}

py::dict curves_to_dict(const pcic::SurvivalCurves& curves) {
    py::dict out;
    out["hazard"] = curves.hazard;
    out["cum_hazard"] = curves.cum_hazard;
    out["survival"] = curves.survival;
    out["cum_survival"] = curves.cum_survival;
    out["norm_risk"] = curves.norm_risk;
    out["norm_event"] = curves.norm_event;
    return out;
}

pcic::FeatureRow row_from_features(const std::vector<double>& features) {
    if (features.size() != pcic::kFeatureCount) {
        throw std::invalid_argument("expected " + std::to_string(pcic::kFeatureCount) +
                                    " features, got " + std::to_string(features.size()));
    }
    pcic::FeatureRow row;
    for (std::size_t i = 0; i < pcic::kFeatureCount; ++i) row.x[i] = features[i];
    return row;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Repeat-purchase recommender core: survival curves, gap forecasts, "
              "category scoring, item ranking, and the staged pipeline.";

    m.def("stage_names", [] { return pcic::stage_names(); },
          "Pipeline stage names in their natural execution order.");

    m.def(
        "run_stage",
        [](const std::string& stage, const std::map<std::string, std::string>& options) {
            pcic::Config config;
            for (const auto& [key, value] : options) config.set(key, value);
            const pcic::StageResult result = pcic::run_stage(stage, config);
            py::dict out;
            out["stage"] = result.stage;
            out["outputs"] = result.outputs;
            out["stats"] = result.stats;
            return out;
        },
        py::arg("stage"), py::arg("options") = std::map<std::string, std::string>{},
        "Runs one pipeline stage with string-valued config overrides; returns the "
        "files written and the stage's summary stats.");

    m.def(
        "config_keys",
        [] {
            std::vector<std::map<std::string, std::string>> keys;
            for (const auto& info : pcic::Config::registry()) {
                keys.push_back({{"key", info.key},
                                {"default", info.default_value},
                                {"doc", info.doc}});
            }
            return keys;
        },
        "Every recognized config key with its default and description.");

    m.def(
        "survival_curves",
        [](const std::vector<int>& event_gaps, const std::vector<int>& censor_gaps,
           std::int64_t min_observations) {
            const pcic::LifeTable table = table_from_gaps(event_gaps, censor_gaps);
            return curves_to_dict(pcic::compute_curves(table, min_observations));
        },
        py::arg("event_gaps"), py::arg("censor_gaps") = std::vector<int>{},
        py::arg("min_observations") = 2,
        "Life-table curves from inter-purchase gaps (in days): hazard, cumulative "
        "hazard, survival, the +-3 day event-mass window, and the normalized risk "
        "and event counts, each indexed by gap day.");

    m.def(
        "fit_arima",
        [](const std::vector<double>& series) -> py::object {
            const auto fit = pcic::fit_arima(series);
            if (!fit) return py::none();
            py::dict out;
            out["p"] = fit->order.p;
            out["d"] = fit->order.d;
            out["ar_coefficients"] = fit->ar_coefficients;
            out["intercept"] = fit->intercept;
            out["aic"] = fit->aic;
            out["forecast"] = fit->forecast;
            return out;
        },
        py::arg("series"),
        "AIC-selected AR model on the differenced series with its one-step "
        "forecast; None when the series is too short or every fit is singular.");

    m.def(
        "gap_feature",
        [](const std::vector<double>& gaps, double days_since_last, double fallback_gap,
           double cap) {
            return pcic::forecast_gap_feature(gaps, days_since_last, fallback_gap, cap);
        },
        py::arg("gaps"), py::arg("days_since_last"), py::arg("fallback_gap"),
        py::arg("cap") = 365.0,
        "Predicted next inter-purchase gap minus days already elapsed, clamped "
        "to +-cap. Positive means the next purchase is still ahead.");

    m.def(
        "depletion_feature",
        [](const std::vector<double>& quantities, const std::vector<double>& gaps,
           double days_since_last, double fallback_rate, double cap) {
            return pcic::forecast_depletion_feature(quantities, gaps, days_since_last,
                                                    fallback_rate, cap);
        },
        py::arg("quantities"), py::arg("gaps"), py::arg("days_since_last"),
        py::arg("fallback_rate"), py::arg("cap") = 365.0,
        "Days until the last purchased quantity runs out at the predicted "
        "consumption rate, minus days already elapsed, clamped to +-cap.");

    m.def(
        "rank_items",
        [](const std::vector<std::tuple<std::string, int, int, double>>& items, double alpha,
           double beta, bool use_nib) {
            std::vector<pcic::ItemStats> stats;
            stats.reserve(items.size());
            for (const auto& [item_id, frequency, days_since, nib] : items) {
                pcic::ItemStats s;
                s.item_id = item_id;
                s.frequency = frequency;
                s.days_since = days_since;
                s.nib = nib;
                stats.push_back(std::move(s));
            }
            pcic::IcConfig config;
            config.alpha = alpha;
            config.beta = beta;
            config.use_nib = use_nib;
            std::vector<std::map<std::string, py::object>> out;
            for (const auto& r : pcic::rank_items_in_category(std::move(stats), config)) {
                out.push_back({{"item_id", py::cast(r.item_id)},
                               {"freq_rank", py::cast(r.freq_rank)},
                               {"recency_rank", py::cast(r.recency_rank)},
                               {"combined", py::cast(r.combined)},
                               {"rk", py::cast(r.rk)},
                               {"ir", py::cast(r.ir)}});
            }
            return out;
        },
        py::arg("items"), py::arg("alpha") = 0.5, py::arg("beta") = 0.5,
        py::arg("use_nib") = true,
        "Ranks one category's items from (item_id, frequency, days_since, "
        "units_per_basket) tuples. Returns dicts ordered by the final rank.");

    m.def(
        "recall_at_k",
        [](const std::vector<std::string>& ranked, const std::set<std::string>& truth, int k) {
            return pcic::recall_at_k(ranked, truth, k);
        },
        py::arg("ranked"), py::arg("truth"), py::arg("k"));

    m.def(
        "ndcg_at_k",
        [](const std::vector<std::string>& ranked, const std::set<std::string>& truth, int k) {
            return pcic::ndcg_at_k(ranked, truth, k);
        },
        py::arg("ranked"), py::arg("truth"), py::arg("k"));

    m.def(
        "feature_names",
        [] {
            return std::vector<std::string>(pcic::kFeatureNames.begin(),
                                            pcic::kFeatureNames.end());
        },
        "Names of the category feature vector, in column order.");

    m.def("simulate_pair_days", &pcic::simulate_pair_days, py::arg("mean_gap"),
          py::arg("horizon_days"), py::arg("seed"),
          py::arg("renewal_shape") = pcic::kDefaultRenewalShape,
          "Purchase-day offsets for one synthetic (user, category) renewal "
          "process; the same stream the synth stage draws from.");

    py::class_<pcic::PcModel>(m, "CategoryModel",
                              "Trained category scorer: a small feed-forward network plus "
                              "the normalization statistics of its training matrix.")
        .def_static(
            "load", [](const std::string& path) { return pcic::read_pc_model(path); },
            py::arg("path"), "Loads a model saved by the train stage.")
        .def(
            "predict",
            [](const pcic::PcModel& model, const std::vector<double>& features) {
                return pcic::predict_p1(model, row_from_features(features));
            },
            py::arg("features"),
            "Repurchase probability for one raw (unnormalized) feature vector.")
        .def_property_readonly("pos_weight",
                               [](const pcic::PcModel& model) { return model.pos_weight; })
        .def_property_readonly("schema",
                               [](const pcic::PcModel& model) { return model.schema; });
}
