#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace chronoqa {

enum class Granularity { Year, Month, Day };

// Relative order of two (possibly differently grained) timestamps.
enum class TimeOrder { Before, After, Overlaps };

// A multi-granularity time value: year, year-month or year-month-day.
struct TimeStamp {
    int year = 0;
    std::optional<int> month;  // 1-12
    std::optional<int> day;    // 1-31; requires month

    Granularity granularity() const {
        if (day) return Granularity::Day;
        if (month) return Granularity::Month;
        return Granularity::Year;
    }

    // Canonical ISO 8601 prefix form: "yyyy", "yyyy-mm" or "yyyy-mm-dd".
    std::string render() const;

    // Drops components finer than the requested granularity.
    TimeStamp truncated(Granularity g) const;

    static TimeStamp of_year(int y) { return TimeStamp{y, std::nullopt, std::nullopt}; }
    static TimeStamp of_month(int y, int m) { return TimeStamp{y, m, std::nullopt}; }
    static TimeStamp of_day(int y, int m, int d) { return TimeStamp{y, m, d}; }

    bool operator==(const TimeStamp&) const = default;
};

// Parses a canonical ISO prefix string ("2009", "2009-05", "2009-05-12").
// Throws MalformedTimestamp for non-numeric text, out-of-range month/day or a
// wrong separator. Natural-language phrases are handled by standardize_time.
TimeStamp parse_timestamp(std::string_view text);

// True when the text parses as a canonical ISO prefix string.
bool is_iso_prefix(std::string_view text);

// Lexicographic comparison over the shared components. When one value is a
// strict prefix of the other ("2009-05" vs "2009-05-12") the covered ranges
// intersect and no strict order exists, so Overlaps is returned. Equal values
// also overlap.
TimeOrder compare_timestamps(const TimeStamp& a, const TimeStamp& b);

const char* to_string(Granularity g);
std::optional<Granularity> granularity_from_string(std::string_view s);

}  // namespace chronoqa
