#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace epialign::csv {

using Row = std::vector<std::string>;

/// Reads one RFC-4180 record (quoted fields may span lines). Accepts LF or
/// CRLF. Returns nullopt at end of input.
std::optional<Row> read_row(std::istream& in);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Writes a record terminated by LF.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double v, int digits);

/// Strict full-field numeric parsing; nullopt on any junk.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace epialign::csv
