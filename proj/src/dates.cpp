#include "pcic/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace pcic {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
Date days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return static_cast<Date>(era * 146097 + static_cast<int>(doe) - 719468);
}

CivilDate civil_from_days(Date days) {
    int z = days + 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[static_cast<size_t>(month - 1)];
}

namespace {

bool parse_int_field(std::string_view text, size_t begin, size_t len, int& out) {
    if (begin + len > text.size()) return false;
    const char* first = text.data() + begin;
    const char* last = first + len;
    for (const char* p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int_field(text, 0, 4, y) || !parse_int_field(text, 5, 2, m) ||
        !parse_int_field(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::string format_date(Date date) {
    const CivilDate c = civil_from_days(date);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
    return buf;
}

Date add_months(Date date, int months) {
    CivilDate c = civil_from_days(date);
    int total = c.year * 12 + (c.month - 1) + months;
    int year = total >= 0 ? total / 12 : (total - 11) / 12;
    int month = total - year * 12 + 1;
    int day = std::min(c.day, days_in_month(year, month));
    return days_from_civil(year, month, day);
}

}  // namespace pcic
