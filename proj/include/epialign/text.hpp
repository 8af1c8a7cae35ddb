#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace epialign::text {

/// Unicode NFC normalization of UTF-8 text. Ill-formed sequences become U+FFFD.
std::string nfc(std::string_view utf8);

/// Full Unicode case folding of the NFC form (result re-normalized to NFC).
std::string casefold(std::string_view utf8);

/// Strips leading/trailing code points with the White_Space property.
std::string trim(std::string_view utf8);

/// Trim + NFC; the key used for exact-duplicate detection.
std::string canonical(std::string_view utf8);

/// ASCII-only case-insensitive substring search.
bool contains_ascii_ci(std::string_view haystack, std::string_view needle);

/// Lower-cased primary subtag of a BCP-47 tag: "it-IT" -> "it".
std::string primary_language(std::string_view tag);

/// Splits valid UTF-8 into code-point substrings.
std::vector<std::string_view> code_points(std::string_view utf8);

}  // namespace epialign::text
