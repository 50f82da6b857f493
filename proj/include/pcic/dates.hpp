#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pcic {

/// Calendar date at day granularity, stored as days since 1970-01-01.
/// All pipeline arithmetic (gaps, windows, censoring horizons) is plain
/// integer arithmetic on this type.
using Date = std::int32_t;

struct CivilDate {
    int year;
    int month;  // 1..12
    int day;    // 1..31
};

Date days_from_civil(int year, int month, int day);
CivilDate civil_from_days(Date days);

int days_in_month(int year, int month);

/// Parses strict "YYYY-MM-DD". Returns nullopt for malformed strings or
/// impossible calendar dates (e.g. 2021-02-30).
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date date);

/// Shifts by calendar months, clamping the day to the target month length
/// (2021-01-31 minus 1 month -> 2020-12-31; 2021-03-31 minus 1 -> 2021-02-28).
Date add_months(Date date, int months);

}  // namespace pcic
