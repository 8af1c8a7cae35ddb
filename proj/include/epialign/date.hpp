#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace epialign {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD`. Throws FormatError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses an ISO-8601 instant such as `2020-02-01T10:00:00Z`,
/// `2020-02-01T10:00:00.123+02:00` or `2020-02-01 10:00:00`. A missing zone
/// designator means UTC; a bare date is midnight UTC. Fractional seconds are
/// truncated.
Instant parse_instant(std::string_view text);
std::string format_instant(Instant t);

/// Calendar date of `t` after shifting by a fixed UTC offset.
Date calendar_date(Instant t, std::chrono::minutes utc_offset = std::chrono::minutes{0});

/// Closed interval of calendar days.
struct DateRange {
    Date first;
    Date last;

    DateRange() = default;
    /// Throws ContractError when last < first.
    DateRange(Date first_day, Date last_day);

    std::size_t size() const { return static_cast<std::size_t>((last - first).count()) + 1; }
    bool contains(Date d) const { return d >= first && d <= last; }
    std::vector<Date> days() const;

    friend bool operator==(const DateRange&, const DateRange&) = default;
};

/// Parses `YYYY-MM-DD:YYYY-MM-DD` (also accepts `..` as the separator).
DateRange parse_date_range(std::string_view text);
std::string format_date_range(const DateRange& r);

}  // namespace epialign
