#include "epialign/date.hpp"

#include <charconv>
#include <cstdio>

#include "epialign/error.hpp"

namespace epialign {

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) {
        throw FormatError("truncated date/time '" + std::string(whole) + "'");
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
            throw FormatError("invalid digit in date/time '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c) {
        throw FormatError("malformed date/time '" + std::string(whole) + "'");
    }
}

Date make_date(int y, int m, int d, std::string_view whole) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw FormatError("invalid calendar date '" + std::string(whole) + "'");
    }
    return sys_days{ymd};
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10) {
        throw FormatError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    const int y = parse_fixed_int(text, 0, 4, text);
    expect_char(text, 4, '-', text);
    const int m = parse_fixed_int(text, 5, 2, text);
    expect_char(text, 7, '-', text);
    const int d = parse_fixed_int(text, 8, 2, text);
    return make_date(y, m, d, text);
}

std::string format_date(Date d) {
    using namespace std::chrono;
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Instant parse_instant(std::string_view text) {
    using namespace std::chrono;
    if (text.size() < 10) {
        throw FormatError("expected ISO-8601 instant, got '" + std::string(text) + "'");
    }
    const Date day = parse_date(text.substr(0, 10));
    Instant t{day};
    std::size_t pos = 10;
    if (pos == text.size()) {
        return t;
    }
    if (text[pos] != 'T' && text[pos] != ' ') {
        throw FormatError("malformed instant '" + std::string(text) + "'");
    }
    ++pos;
    const int hh = parse_fixed_int(text, pos, 2, text);
    expect_char(text, pos + 2, ':', text);
    const int mm = parse_fixed_int(text, pos + 3, 2, text);
    pos += 5;
    int ss = 0;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_fixed_int(text, pos + 1, 2, text);
        pos += 3;
    }
    if (hh > 23 || mm > 59 || ss > 60) {
        throw FormatError("time of day out of range in '" + std::string(text) + "'");
    }
    if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            ++pos;
        }
        if (pos == start) {
            throw FormatError("empty fractional seconds in '" + std::string(text) + "'");
        }
    }
    t += hours{hh} + minutes{mm} + seconds{ss};
    if (pos == text.size()) {
        return t;
    }
    const char zone = text[pos];
    if ((zone == 'Z' || zone == 'z') && pos + 1 == text.size()) {
        return t;
    }
    if (zone != '+' && zone != '-') {
        throw FormatError("malformed zone designator in '" + std::string(text) + "'");
    }
    const int oh = parse_fixed_int(text, pos + 1, 2, text);
    std::size_t zpos = pos + 3;
    if (zpos < text.size() && text[zpos] == ':') {
        ++zpos;
    }
    const int om = parse_fixed_int(text, zpos, 2, text);
    if (zpos + 2 != text.size() || oh > 23 || om > 59) {
        throw FormatError("malformed zone offset in '" + std::string(text) + "'");
    }
    const minutes offset = hours{oh} + minutes{om};
    // Local time = UTC + offset, so UTC = local - offset.
    return zone == '+' ? t - offset : t + offset;
}

std::string format_instant(Instant t) {
    using namespace std::chrono;
    const Date day = floor<days>(t);
    const hh_mm_ss tod{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

Date calendar_date(Instant t, std::chrono::minutes utc_offset) {
    return std::chrono::floor<std::chrono::days>(t + utc_offset);
}

DateRange::DateRange(Date first_day, Date last_day) : first(first_day), last(last_day) {
    if (last < first) {
        throw ContractError("date range ends before it starts: " + format_date(first) + " > " +
                            format_date(last));
    }
}

std::vector<Date> DateRange::days() const {
    std::vector<Date> out;
    out.reserve(size());
    for (Date d = first; d <= last; d += std::chrono::days{1}) {
        out.push_back(d);
    }
    return out;
}

DateRange parse_date_range(std::string_view text) {
    std::size_t sep = text.find("..");
    std::size_t skip = 2;
    if (sep == std::string_view::npos) {
        sep = text.find(':');
        skip = 1;
    }
    if (sep == std::string_view::npos) {
        throw FormatError("expected FIRST:LAST date range, got '" + std::string(text) + "'");
    }
    const Date first = parse_date(text.substr(0, sep));
    const Date last = parse_date(text.substr(sep + skip));
    if (last < first) {
        throw FormatError("date range ends before it starts: '" + std::string(text) + "'");
    }
    return DateRange{first, last};
}

std::string format_date_range(const DateRange& r) {
    return format_date(r.first) + ":" + format_date(r.last);
}

}  // namespace epialign
