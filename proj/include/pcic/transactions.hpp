#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/dates.hpp"

namespace pcic {

struct TransactionRecord {
    std::string user_id;
    std::string order_id;
    Date order_date = 0;
    std::string item_id;
    std::string category_id;
    double quantity = 0.0;
};

/// Column names to look up in the input header. Defaults are the canonical
/// schema; remap via config keys col.user, col.order, col.date, col.item,
/// col.category, col.quantity.
struct CsvFormat {
    std::string user = "user_id";
    std::string order = "order_id";
    std::string date = "order_date";
    std::string item = "item_id";
    std::string category = "category_id";
    std::string quantity = "quantity";
};

struct ParseStats {
    std::size_t rows_read = 0;      // data rows seen (header excluded)
    std::size_t rows_rejected = 0;  // bad date / negative or non-numeric quantity
    std::size_t rows_merged = 0;    // duplicate (user, order, item) rows folded in
};

class IngestError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Reads a transaction log. Rows with unparseable dates or negative
/// quantities are counted and skipped; duplicate (user, order, item) rows are
/// quantity-summed into the first occurrence. Throws IngestError on a missing
/// file, a missing required column, or when more than half the data rows are
/// rejected (wrong schema guard).
std::vector<TransactionRecord> parse_transactions(const std::string& path,
                                                  const CsvFormat& format = {},
                                                  ParseStats* stats = nullptr);

/// Writes the canonical CSV (header user_id,order_id,order_date,item_id,
/// category_id,quantity). Re-parsing an emitted file reproduces the records.
void write_transactions(const std::string& path, std::span<const TransactionRecord> records);

struct BasketItem {
    std::string item_id;
    std::string category_id;
    double quantity = 0.0;
};

/// One order. Same-day orders are distinct baskets keyed by order_id; items
/// inside a basket carry no order and are stored sorted by item_id.
struct Basket {
    Date date = 0;
    std::string order_id;
    std::vector<BasketItem> items;
};

struct UserHistory {
    std::string user_id;
    std::vector<Basket> baskets;  // nondecreasing in (date, order_id)
};

/// Groups records into per-user, date-ordered baskets. Output is sorted by
/// user_id; safe to share read-only afterwards.
std::vector<UserHistory> build_histories(std::span<const TransactionRecord> records);

/// A day on which the user bought >= 1 item of a category, with the total
/// quantity bought that day. One event per calendar day: survival gaps, gap
/// series and num_purchases all count these.
struct CategoryEvent {
    Date date = 0;
    double quantity = 0.0;
};

/// Per-category purchase events for one user, keyed by category_id,
/// date-ascending within each category.
std::map<std::string, std::vector<CategoryEvent>> per_category_events(const UserHistory& user);

}  // namespace pcic
