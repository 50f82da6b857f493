#include "pcic/config.hpp"

#include <algorithm>
#include <fstream>

#include "pcic/util.hpp"

namespace pcic {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

const ConfigKeyInfo* find_key(const std::string& key) {
    for (const auto& info : Config::registry()) {
        if (key == info.key) return &info;
    }
    return nullptr;
}

const char* type_name(ConfigType type) {
    switch (type) {
        case ConfigType::kString: return "string";
        case ConfigType::kInt: return "integer";
        case ConfigType::kDouble: return "number";
        case ConfigType::kBool: return "boolean";
    }
    return "value";
}

}  // namespace

const std::vector<ConfigKeyInfo>& Config::registry() {
    static const std::vector<ConfigKeyInfo> keys = {
        {"paths.workdir", ConfigType::kString, "work", "directory stage artifacts live in"},
        {"paths.input", ConfigType::kString, "", "transaction CSV consumed by ingest"},
        {"col.user", ConfigType::kString, "user_id", "input column holding the user id"},
        {"col.order", ConfigType::kString, "order_id", "input column holding the order id"},
        {"col.date", ConfigType::kString, "order_date", "input column holding the ISO order date"},
        {"col.item", ConfigType::kString, "item_id", "input column holding the item id"},
        {"col.category", ConfigType::kString, "category_id",
         "input column holding the category id"},
        {"col.quantity", ConfigType::kString, "quantity", "input column holding the quantity"},
        {"seed", ConfigType::kInt, "42", "master seed for folds, training and generation"},
        {"threads", ConfigType::kInt, "0", "worker threads; 0 uses every core"},
        {"split.label_window_days", ConfigType::kInt, "7",
         "length m of the held-out label window in days"},
        {"split.history_days", ConfigType::kInt, "548",
         "feature history horizon before the split date"},
        {"split.engaged_only", ConfigType::kBool, "false",
         "keep only users purchasing in more distinct categories than the threshold"},
        {"split.engaged_category_threshold", ConfigType::kInt, "25",
         "category-count threshold for engaged users"},
        {"survival.min_observations", ConfigType::kInt, "2",
         "life tables below this observation count fall back to trivial curves"},
        {"features.arima_cap", ConfigType::kDouble, "365",
         "clamp for the two forecast features, in days"},
        {"train.optimizer", ConfigType::kString, "adam", "adam or sgd"},
        {"train.learning_rate", ConfigType::kDouble, "0.001", "optimizer step size"},
        {"train.batch_size", ConfigType::kInt, "256", "minibatch size"},
        {"train.max_epochs", ConfigType::kInt, "50", "training epoch cap"},
        {"train.patience", ConfigType::kInt, "5",
         "epochs without validation improvement before stopping"},
        {"train.pos_weight", ConfigType::kDouble, "0",
         "loss weight of positive rows; <= 0 balances classes automatically"},
        {"ic.alpha", ConfigType::kDouble, "0.5", "item-rank weight on recency"},
        {"ic.beta", ConfigType::kDouble, "0.5", "item-rank weight on frequency"},
        {"ic.use_nib", ConfigType::kBool, "true",
         "compress item ranks by typical basket quantity"},
        {"recommend.merge_order", ConfigType::kString, "ic_major",
         "ic_major round-robins categories; pc_major exhausts each category first"},
        {"recommend.top_k", ConfigType::kInt, "10", "recommendations kept per user"},
        {"recommend.format", ConfigType::kString, "csv", "output format: csv or jsonl"},
        {"filter.min_item_purchases", ConfigType::kInt, "2",
         "corpus-wide purchase floor within the lookback window"},
        {"filter.lookback_months", ConfigType::kInt, "6",
         "calendar months behind the reference date the purchase floor looks at; <= 0 means all"},
        {"filter.repurchase_threshold", ConfigType::kDouble, "0",
         "minimum repeat-buyer fraction per item; <= 0 disables"},
        {"filter.excluded_categories", ConfigType::kString, "",
         "comma-separated category ids never recommended"},
        {"eval.protocol", ConfigType::kString, "label_window",
         "label_window holds out the last m days; last_basket holds out each user's final basket"},
        {"eval.folds", ConfigType::kInt, "5", "cross-validation fold count"},
        {"eval.top_k", ConfigType::kInt, "10", "cutoff K for recall and NDCG"},
        {"eval.min_users", ConfigType::kInt, "50", "minimum evaluable users"},
        {"eval.tune_ic", ConfigType::kBool, "true",
         "grid-search ic.alpha/ic.beta on each fold's validation users"},
        {"importance.repeats", ConfigType::kInt, "5", "shuffles per feature"},
        {"synth.n_users", ConfigType::kInt, "1000", "generated user count"},
        {"synth.n_categories", ConfigType::kInt, "30", "generated category count"},
        {"synth.items_per_category", ConfigType::kInt, "10", "items per category"},
        {"synth.horizon_days", ConfigType::kInt, "540", "generated history length in days"},
        {"synth.category_affinity", ConfigType::kDouble, "0.35",
         "probability a user shops a category at all"},
        {"synth.gap_shape", ConfigType::kDouble, "4", "gamma shape of per-pair mean gaps"},
        {"synth.gap_scale", ConfigType::kDouble, "10", "gamma scale of per-pair mean gaps"},
        {"synth.min_mean_gap", ConfigType::kDouble, "3", "floor for drawn mean gaps, days"},
        {"synth.renewal_shape", ConfigType::kDouble, "6",
         "gamma shape of renewal gaps; 1 is memoryless, larger is more rhythmic"},
        {"synth.zipf_exponent", ConfigType::kDouble, "1.2",
         "skew of per-user item preferences inside a category"},
        {"synth.quantity_mean", ConfigType::kDouble, "2", "mean units per purchase"},
        {"synth.start_date", ConfigType::kString, "2024-01-01", "first generated day"},
    };
    return keys;
}

Config::Config() {
    for (const auto& info : registry()) values_[info.key] = info.default_value;
}

Config Config::from_file(const std::string& path) {
    Config config;
    config.apply_file(path);
    return config;
}

void Config::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": expected `key = value`");
        }
        try {
            set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void Config::set(const std::string& key, const std::string& value) {
    if (key.rfind("stats.", 0) == 0) {
        values_[key] = value;
        return;
    }
    const ConfigKeyInfo* info = find_key(key);
    if (info == nullptr) throw ConfigError("unknown config key: " + key);
    switch (info->type) {
        case ConfigType::kString:
            break;
        case ConfigType::kInt: {
            std::int64_t v = 0;
            if (!parse_int64(value, v)) {
                throw ConfigError(key + " expects an " + type_name(info->type) + ", got `" +
                                  value + "`");
            }
            break;
        }
        case ConfigType::kDouble: {
            double v = 0.0;
            if (!parse_double(value, v)) {
                throw ConfigError(key + " expects a " + type_name(info->type) + ", got `" +
                                  value + "`");
            }
            break;
        }
        case ConfigType::kBool: {
            if (value != "true" && value != "false" && value != "1" && value != "0" &&
                value != "yes" && value != "no") {
                throw ConfigError(key + " expects a " + type_name(info->type) + ", got `" +
                                  value + "`");
            }
            break;
        }
    }
    values_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
}

std::int64_t Config::get_int(const std::string& key) const {
    std::int64_t v = 0;
    const std::string text = get_string(key);
    if (!parse_int64(text, v)) throw ConfigError(key + " is not an integer: `" + text + "`");
    return v;
}

double Config::get_double(const std::string& key) const {
    double v = 0.0;
    const std::string text = get_string(key);
    if (!parse_double(text, v)) throw ConfigError(key + " is not a number: `" + text + "`");
    return v;
}

bool Config::get_bool(const std::string& key) const {
    const std::string text = get_string(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key + " is not a boolean: `" + text + "`");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    const std::string text = get_string(key);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string::npos ? text.size() : comma;
        const std::string piece = trim(std::string_view(text).substr(start, end - start));
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void Config::write(const std::string& path,
                   const std::map<std::string, std::string>& stats) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config: " + path);
    for (const auto& [key, value] : values_) {
        if (key.rfind("stats.", 0) == 0) continue;
        out << key << " = " << value << "\n";
    }
    for (const auto& [key, value] : stats) {
        out << (key.rfind("stats.", 0) == 0 ? key : "stats." + key) << " = " << value << "\n";
    }
}

}  // namespace pcic
