#include "cyclebench/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cyclebench {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int k[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap(y)) return 29;
    return k[m - 1];
}

}  // namespace

bool is_valid(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
           d.day <= days_in_month(d.year, d.month);
}

Date parse_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw std::invalid_argument("bad date '" + s + "': expected YYYY-MM-DD");
    Date d;
    auto num = [&](int from, int to, int& out) {
        auto res = std::from_chars(s.data() + from, s.data() + to, out);
        if (res.ec != std::errc{} || res.ptr != s.data() + to)
            throw std::invalid_argument("bad date '" + s + "': expected YYYY-MM-DD");
    };
    num(0, 4, d.year);
    num(5, 7, d.month);
    num(8, 10, d.day);
    if (!is_valid(d)) throw std::invalid_argument("bad date '" + s + "': out of range");
    return d;
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

// Civil-day algorithms; exact for the whole proleptic Gregorian calendar.
std::int64_t to_ordinal(const Date& d) {
    std::int64_t y = d.year;
    y -= d.month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date from_ordinal(std::int64_t n) {
    n += 719468;
    const std::int64_t era = (n >= 0 ? n : n - 146096) / 146097;
    const std::int64_t doe = n - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp + (mp < 10 ? 3 : -9);
    return Date{int(y + (m <= 2)), int(m), int(d)};
}

int weekday(const Date& d) {
    // 1970-01-01 was a Thursday (index 3).
    std::int64_t n = to_ordinal(d) + 3;
    return int(((n % 7) + 7) % 7);
}

Date next_weekday(const Date& d) {
    std::int64_t n = to_ordinal(d);
    do {
        ++n;
    } while ((((n + 3) % 7) + 7) % 7 >= 5);
    return from_ordinal(n);
}

}  // namespace cyclebench
