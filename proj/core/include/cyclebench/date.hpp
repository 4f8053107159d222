#pragma once
// Calendar dates for daily panels. Only what the loaders and the splitter
// need: ISO-8601 parsing, ordering and day arithmetic on the proleptic
// Gregorian calendar. No intraday times; weekends/holidays are simply
// absent from the data.

#include <compare>
#include <cstdint>
#include <string>

namespace cyclebench {

struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_valid(const Date& d);

// Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed input.
Date parse_date(const std::string& s);

std::string to_string(const Date& d);

// Days since 1970-01-01 (negative before).
std::int64_t to_ordinal(const Date& d);
Date from_ordinal(std::int64_t n);

// 0 = Monday .. 6 = Sunday.
int weekday(const Date& d);

// First Monday..Friday strictly after d.
Date next_weekday(const Date& d);

}  // namespace cyclebench
