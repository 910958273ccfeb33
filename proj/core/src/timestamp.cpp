#include "chronoqa/timestamp.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "chronoqa/errors.hpp"

namespace chronoqa {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int value = 0;
    std::from_chars(s.data(), s.data() + s.size(), value);
    return value;
}

}  // namespace

std::string TimeStamp::render() const {
    char buf[16];
    if (day) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, *month, *day);
    } else if (month) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, *month);
    } else {
        std::snprintf(buf, sizeof(buf), "%04d", year);
    }
    return buf;
}

TimeStamp TimeStamp::truncated(Granularity g) const {
    TimeStamp t = *this;
    if (g == Granularity::Year) {
        t.month.reset();
        t.day.reset();
    } else if (g == Granularity::Month) {
        t.day.reset();
    }
    return t;
}

TimeStamp parse_timestamp(std::string_view text) {
    // Accepted widths: "yyyy" (4), "yyyy-mm" (7), "yyyy-mm-dd" (10).
    if (text.size() != 4 && text.size() != 7 && text.size() != 10) {
        throw MalformedTimestamp(std::string(text));
    }
    std::string_view year_part = text.substr(0, 4);
    if (!all_digits(year_part)) throw MalformedTimestamp(std::string(text));

    TimeStamp t;
    t.year = to_int(year_part);

    if (text.size() >= 7) {
        if (text[4] != '-') throw MalformedTimestamp(std::string(text));
        std::string_view month_part = text.substr(5, 2);
        if (!all_digits(month_part)) throw MalformedTimestamp(std::string(text));
        int m = to_int(month_part);
        if (m < 1 || m > 12) throw MalformedTimestamp(std::string(text));
        t.month = m;
    }
    if (text.size() == 10) {
        if (text[7] != '-') throw MalformedTimestamp(std::string(text));
        std::string_view day_part = text.substr(8, 2);
        if (!all_digits(day_part)) throw MalformedTimestamp(std::string(text));
        int d = to_int(day_part);
        if (d < 1 || d > 31) throw MalformedTimestamp(std::string(text));
        t.day = d;
    }
    return t;
}

bool is_iso_prefix(std::string_view text) {
    try {
        parse_timestamp(text);
        return true;
    } catch (const MalformedTimestamp&) {
        return false;
    }
}

TimeOrder compare_timestamps(const TimeStamp& a, const TimeStamp& b) {
    if (a.year != b.year) return a.year < b.year ? TimeOrder::Before : TimeOrder::After;
    if (!a.month || !b.month) return TimeOrder::Overlaps;
    if (*a.month != *b.month) {
        return *a.month < *b.month ? TimeOrder::Before : TimeOrder::After;
    }
    if (!a.day || !b.day) return TimeOrder::Overlaps;
    if (*a.day != *b.day) return *a.day < *b.day ? TimeOrder::Before : TimeOrder::After;
    return TimeOrder::Overlaps;
}

const char* to_string(Granularity g) {
    switch (g) {
        case Granularity::Year: return "year";
        case Granularity::Month: return "month";
        case Granularity::Day: return "day";
    }
    return "year";
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
    if (s == "year" || s == "Year") return Granularity::Year;
    if (s == "month" || s == "Month") return Granularity::Month;
    if (s == "day" || s == "Day") return Granularity::Day;
    return std::nullopt;
}

}  // namespace chronoqa
