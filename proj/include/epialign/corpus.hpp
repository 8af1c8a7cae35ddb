#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epialign/date.hpp"

namespace epialign::corpus {

struct Tweet {
    std::string id;
    Instant timestamp{};
    std::string lang;
    std::string text;
    std::optional<bool> is_retweet;

    friend bool operator==(const Tweet&, const Tweet&) = default;
};

struct TweetParseResult {
    std::vector<Tweet> tweets;
    std::size_t parse_errors = 0;
};

/// Reads newline-delimited JSON objects with fields `id`, `created_at`,
/// `lang`, `text` and optional `is_retweet`. Malformed lines are skipped and
/// counted. Throws IoError if the stream is not readable.
TweetParseResult parse_tweet_jsonl(std::istream& in);

/// Writes one JSON object per tweet using the same schema, LF-terminated.
void write_tweet_jsonl(std::ostream& out, std::span<const Tweet> tweets);

enum class RemovalReason : std::uint8_t {
    wrong_language,
    empty_text,
    retweet,
    hyperlink,
    other_country,
    duplicate,
};

inline constexpr std::array<RemovalReason, 6> kRemovalReasons{
    RemovalReason::wrong_language, RemovalReason::empty_text,    RemovalReason::retweet,
    RemovalReason::hyperlink,      RemovalReason::other_country, RemovalReason::duplicate,
};

std::string_view to_string(RemovalReason reason);

struct FilterConfig {
    std::string language;
    std::vector<std::string> country_lexicon;
    bool drop_retweets = true;
    bool drop_hyperlinks = true;
    bool drop_duplicates = true;

    /// Throws ContractError on an empty language or a blank lexicon entry.
    void validate() const;
};

struct FilterStats {
    std::size_t pre_count = 0;
    std::size_t post_count = 0;
    std::array<std::size_t, kRemovalReasons.size()> removed{};

    std::size_t removed_by(RemovalReason reason) const { return removed[static_cast<std::size_t>(reason)]; }
    std::size_t removed_total() const;

    friend bool operator==(const FilterStats&, const FilterStats&) = default;
};

struct FilterResult {
    std::vector<Tweet> tweets;
    FilterStats stats;
};

/// Applies the removal rules in the fixed precedence order of RemovalReason.
/// Rule evaluation is spread over `threads` workers; deduplication is a
/// sequential pass, so the result does not depend on the worker count.
FilterResult filter_corpus(std::span<const Tweet> tweets, const FilterConfig& cfg, unsigned threads = 1);

/// First rule (other than `duplicate`) that removes the tweet, if any.
std::optional<RemovalReason> first_removal_rule(const Tweet& tweet, const FilterConfig& cfg,
                                                std::span<const std::string> folded_lexicon);

/// One entry per non-blank line; `#` starts a comment.
std::vector<std::string> read_lexicon(std::istream& in);

// ---------------------------------------------------------------------------
// Case counts

enum class CaseMode : std::uint8_t { total, new_cases };

std::string_view to_string(CaseMode mode);
/// Accepts "total" or "new". Throws FormatError otherwise.
CaseMode parse_case_mode(std::string_view name);

struct CaseSeries {
    std::string country;
    Date start{};
    std::vector<std::int64_t> counts;
    CaseMode mode = CaseMode::total;

    Date end() const { return start + std::chrono::days{static_cast<long>(counts.size()) - 1}; }
    DateRange range() const { return DateRange{start, end()}; }
    std::optional<std::int64_t> on(Date d) const;

    friend bool operator==(const CaseSeries&, const CaseSeries&) = default;
};

struct CaseParseResult {
    CaseSeries series;
    std::vector<std::string> warnings;
};

/// Long CSV with header `date,country,total_cases`; one country per file.
/// Interior gaps are forward-filled and reported, one warning per day.
CaseParseResult parse_case_csv_long(std::istream& in);

/// JHU CSSE wide time-series CSV. Rows whose Country/Region equals `country`
/// are summed per date column.
CaseSeries parse_case_csv_jhu_wide(std::istream& in, std::string_view country);

/// First differences of a total series; new[0] = total[0]. Negative
/// differences (reporting corrections) are kept.
CaseSeries derive_new_cases(const CaseSeries& totals);

/// Inverse of derive_new_cases.
CaseSeries cumulative_sum(const CaseSeries& daily);

}  // namespace epialign::corpus
