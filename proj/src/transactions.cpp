#include "pcic/transactions.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>
#include <unordered_map>

#include "pcic/csv.hpp"
#include "pcic/util.hpp"

namespace pcic {

namespace {

std::size_t require_column(const std::vector<std::string>& header, const std::string& name,
                           const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw IngestError("missing required column '" + name + "' in " + path);
}

}  // namespace

std::vector<TransactionRecord> parse_transactions(const std::string& path, const CsvFormat& format,
                                                  ParseStats* stats) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open transaction file: " + path);

    std::string line;
    if (!read_csv_line(in, line, /*first_line=*/true)) {
        throw IngestError("empty transaction file: " + path);
    }
    const auto header = split_csv_line(line);
    const std::size_t col_user = require_column(header, format.user, path);
    const std::size_t col_order = require_column(header, format.order, path);
    const std::size_t col_date = require_column(header, format.date, path);
    const std::size_t col_item = require_column(header, format.item, path);
    const std::size_t col_category = require_column(header, format.category, path);
    const std::size_t col_quantity = require_column(header, format.quantity, path);
    const std::size_t min_fields =
        1 + std::max({col_user, col_order, col_date, col_item, col_category, col_quantity});

    ParseStats local;
    std::vector<TransactionRecord> records;
    // (user, order, item) -> index of first occurrence, for quantity aggregation
    std::unordered_map<std::string, std::size_t> first_seen;

    while (read_csv_line(in, line)) {
        if (line.empty()) continue;
        ++local.rows_read;
        const auto fields = split_csv_line(line);
        if (fields.size() < min_fields) {
            ++local.rows_rejected;
            continue;
        }
        const auto date = parse_date(fields[col_date]);
        double quantity = 0.0;
        const bool quantity_ok = parse_double(fields[col_quantity], quantity) && quantity >= 0.0;
        if (!date || !quantity_ok || fields[col_user].empty() || fields[col_item].empty()) {
            ++local.rows_rejected;
            continue;
        }
        std::string key = fields[col_user];
        key += '\x1f';
        key += fields[col_order];
        key += '\x1f';
        key += fields[col_item];
        if (auto it = first_seen.find(key); it != first_seen.end()) {
            records[it->second].quantity += quantity;
            ++local.rows_merged;
            continue;
        }
        first_seen.emplace(std::move(key), records.size());
        records.push_back(TransactionRecord{fields[col_user], fields[col_order], *date,
                                            fields[col_item], fields[col_category], quantity});
    }

    if (local.rows_read > 0 && local.rows_rejected * 2 > local.rows_read) {
        throw IngestError("rejected " + std::to_string(local.rows_rejected) + " of " +
                          std::to_string(local.rows_read) + " rows in " + path +
                          " (more than half); check the column mapping");
    }
    if (stats) *stats = local;
    return records;
}

void write_transactions(const std::string& path, std::span<const TransactionRecord> records) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write transaction file: " + path);
    out << "user_id,order_id,order_date,item_id,category_id,quantity\n";
    for (const auto& r : records) {
        out << csv_escape(r.user_id) << ',' << csv_escape(r.order_id) << ','
            << format_date(r.order_date) << ',' << csv_escape(r.item_id) << ','
            << csv_escape(r.category_id) << ',' << format_double(r.quantity) << '\n';
    }
    if (!out) throw IngestError("short write to " + path);
}

std::vector<UserHistory> build_histories(std::span<const TransactionRecord> records) {
    // Keyed reduction: user -> (date, order) -> items.
    std::unordered_map<std::string, std::map<std::pair<Date, std::string>, std::vector<BasketItem>>>
        by_user;
    for (const auto& r : records) {
        by_user[r.user_id][{r.order_date, r.order_id}].push_back(
            BasketItem{r.item_id, r.category_id, r.quantity});
    }
    std::vector<UserHistory> histories;
    histories.reserve(by_user.size());
    for (auto& [user_id, baskets] : by_user) {
        UserHistory h;
        h.user_id = user_id;
        h.baskets.reserve(baskets.size());
        for (auto& [key, items] : baskets) {
            std::sort(items.begin(), items.end(), [](const BasketItem& a, const BasketItem& b) {
                return std::tie(a.item_id, a.category_id) < std::tie(b.item_id, b.category_id);
            });
            h.baskets.push_back(Basket{key.first, key.second, std::move(items)});
        }
        histories.push_back(std::move(h));
    }
    std::sort(histories.begin(), histories.end(),
              [](const UserHistory& a, const UserHistory& b) { return a.user_id < b.user_id; });
    return histories;
}

std::map<std::string, std::vector<CategoryEvent>> per_category_events(const UserHistory& user) {
    std::map<std::string, std::vector<CategoryEvent>> events;
    for (const auto& basket : user.baskets) {
        for (const auto& item : basket.items) {
            auto& list = events[item.category_id];
            if (!list.empty() && list.back().date == basket.date) {
                list.back().quantity += item.quantity;
            } else {
                list.push_back(CategoryEvent{basket.date, item.quantity});
            }
        }
    }
    return events;
}

}  // namespace pcic
