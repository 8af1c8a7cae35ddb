#include "epialign/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>

#include "epialign/error.hpp"

namespace epialign::text {

namespace {

const icu::Normalizer2& nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || norm == nullptr) {
        throw std::runtime_error("ICU NFC normalizer unavailable");
    }
    return *norm;
}

icu::UnicodeString normalize(const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = nfc_instance().normalize(s, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("ICU normalization failed");
    }
    return out;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

icu::UnicodeString from_utf8(std::string_view utf8) {
    return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
}

}  // namespace

std::string nfc(std::string_view utf8) {
    return to_utf8(normalize(from_utf8(utf8)));
}

std::string casefold(std::string_view utf8) {
    icu::UnicodeString s = normalize(from_utf8(utf8));
    s.foldCase(U_FOLD_CASE_DEFAULT);
    return to_utf8(normalize(s));
}

std::string trim(std::string_view utf8) {
    const icu::UnicodeString s = from_utf8(utf8);
    int32_t begin = 0;
    int32_t end = s.length();
    while (begin < end) {
        const UChar32 c = s.char32At(begin);
        if (!u_isUWhiteSpace(c)) {
            break;
        }
        begin += U16_LENGTH(c);
    }
    while (end > begin) {
        const int32_t prev = s.moveIndex32(end, -1);
        if (!u_isUWhiteSpace(s.char32At(prev))) {
            break;
        }
        end = prev;
    }
    return to_utf8(s.tempSubStringBetween(begin, end));
}

std::string canonical(std::string_view utf8) {
    return nfc(trim(utf8));
}

bool contains_ascii_ci(std::string_view haystack, std::string_view needle) {
    const auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it != haystack.end() || needle.empty();
}

std::string primary_language(std::string_view tag) {
    const std::size_t cut = tag.find_first_of("-_");
    std::string out(tag.substr(0, cut));
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string_view> code_points(std::string_view utf8) {
    std::vector<std::string_view> out;
    const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
    const auto length = static_cast<int32_t>(utf8.size());
    int32_t i = 0;
    while (i < length) {
        const int32_t start = i;
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        (void)c;
        out.push_back(utf8.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
    return out;
}

}  // namespace epialign::text
