#include "epialign/corpus.hpp"

#include <algorithm>
#include <map>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "epialign/csv.hpp"
#include "epialign/error.hpp"
#include "epialign/text.hpp"

namespace epialign::corpus {

using nlohmann::json;

namespace {

std::optional<Tweet> tweet_from_json(const json& obj) {
    if (!obj.is_object()) {
        return std::nullopt;
    }
    const auto id_it = obj.find("id");
    const auto created_it = obj.find("created_at");
    const auto lang_it = obj.find("lang");
    const auto text_it = obj.find("text");
    if (id_it == obj.end() || created_it == obj.end() || lang_it == obj.end() || text_it == obj.end()) {
        return std::nullopt;
    }
    Tweet t;
    if (id_it->is_string()) {
        t.id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
        t.id = id_it->dump();
    } else {
        return std::nullopt;
    }
    if (t.id.empty() || !created_it->is_string() || !lang_it->is_string() || !text_it->is_string()) {
        return std::nullopt;
    }
    try {
        t.timestamp = parse_instant(created_it->get<std::string>());
    } catch (const FormatError&) {
        return std::nullopt;
    }
    t.lang = lang_it->get<std::string>();
    t.text = text_it->get<std::string>();
    if (const auto rt = obj.find("is_retweet"); rt != obj.end() && !rt->is_null()) {
        if (!rt->is_boolean()) {
            return std::nullopt;
        }
        t.is_retweet = rt->get<bool>();
    }
    return t;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

TweetParseResult parse_tweet_jsonl(std::istream& in) {
    if (!in.good() && !in.eof()) {
        throw IoError("tweet stream is not readable");
    }
    TweetParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (is_blank(line)) {
            continue;
        }
        const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded()) {
            ++result.parse_errors;
            continue;
        }
        if (auto tweet = tweet_from_json(obj)) {
            result.tweets.push_back(std::move(*tweet));
        } else {
            ++result.parse_errors;
        }
    }
    if (in.bad()) {
        throw IoError("read failure on tweet stream");
    }
    return result;
}

void write_tweet_jsonl(std::ostream& out, std::span<const Tweet> tweets) {
    for (const Tweet& t : tweets) {
        json obj = {
            {"id", t.id},
            {"created_at", format_instant(t.timestamp)},
            {"lang", t.lang},
            {"text", t.text},
        };
        if (t.is_retweet) {
            obj["is_retweet"] = *t.is_retweet;
        }
        out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

std::string_view to_string(RemovalReason reason) {
    switch (reason) {
        case RemovalReason::wrong_language: return "wrong_language";
        case RemovalReason::empty_text: return "empty_text";
        case RemovalReason::retweet: return "retweet";
        case RemovalReason::hyperlink: return "hyperlink";
        case RemovalReason::other_country: return "other_country";
        case RemovalReason::duplicate: return "duplicate";
    }
    return "unknown";
}

void FilterConfig::validate() const {
    if (text::trim(language).empty()) {
        throw ContractError("filter config: language must be nonempty");
    }
    for (const std::string& entry : country_lexicon) {
        if (text::trim(entry).empty()) {
            throw ContractError("filter config: country lexicon entries must be nonempty");
        }
    }
}

std::size_t FilterStats::removed_total() const {
    std::size_t sum = 0;
    for (std::size_t n : removed) {
        sum += n;
    }
    return sum;
}

std::optional<RemovalReason> first_removal_rule(const Tweet& tweet, const FilterConfig& cfg,
                                                std::span<const std::string> folded_lexicon) {
    if (text::primary_language(tweet.lang) != text::primary_language(cfg.language)) {
        return RemovalReason::wrong_language;
    }
    const std::string trimmed = text::trim(tweet.text);
    if (trimmed.empty()) {
        return RemovalReason::empty_text;
    }
    if (cfg.drop_retweets && (tweet.is_retweet.value_or(false) || trimmed.starts_with("RT @"))) {
        return RemovalReason::retweet;
    }
    if (cfg.drop_hyperlinks &&
        (text::contains_ascii_ci(tweet.text, "http://") || text::contains_ascii_ci(tweet.text, "https://"))) {
        return RemovalReason::hyperlink;
    }
    if (!folded_lexicon.empty()) {
        const std::string folded = text::casefold(tweet.text);
        for (const std::string& name : folded_lexicon) {
            if (folded.find(name) != std::string::npos) {
                return RemovalReason::other_country;
            }
        }
    }
    return std::nullopt;
}

FilterResult filter_corpus(std::span<const Tweet> tweets, const FilterConfig& cfg, unsigned threads) {
    cfg.validate();
    std::vector<std::string> folded_lexicon;
    folded_lexicon.reserve(cfg.country_lexicon.size());
    for (const std::string& entry : cfg.country_lexicon) {
        folded_lexicon.push_back(text::casefold(text::trim(entry)));
    }

    // Phase 1: independent per-tweet rule evaluation.
    std::vector<std::optional<RemovalReason>> verdicts(tweets.size());
    std::vector<std::string> keys(cfg.drop_duplicates ? tweets.size() : 0);
    const auto evaluate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            verdicts[i] = first_removal_rule(tweets[i], cfg, folded_lexicon);
            if (cfg.drop_duplicates && !verdicts[i]) {
                keys[i] = text::canonical(tweets[i].text);
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, tweets.size() / 256));
    if (workers <= 1) {
        evaluate(0, tweets.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (tweets.size() + workers - 1) / workers;
        for (std::size_t begin = 0; begin < tweets.size(); begin += chunk) {
            pool.emplace_back(evaluate, begin, std::min(tweets.size(), begin + chunk));
        }
    }

    // Phase 2: sequential dedup against earlier survivors.
    FilterResult result;
    result.stats.pre_count = tweets.size();
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
        std::optional<RemovalReason> reason = verdicts[i];
        if (!reason && cfg.drop_duplicates && !seen.insert(keys[i]).second) {
            reason = RemovalReason::duplicate;
        }
        if (reason) {
            ++result.stats.removed[static_cast<std::size_t>(*reason)];
        } else {
            result.tweets.push_back(tweets[i]);
        }
    }
    result.stats.post_count = result.tweets.size();
    return result;
}

std::vector<std::string> read_lexicon(std::istream& in) {
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::string entry = text::trim(line);
        if (!entry.empty()) {
            entries.push_back(std::move(entry));
        }
    }
    return entries;
}

// ---------------------------------------------------------------------------

std::string_view to_string(CaseMode mode) {
    return mode == CaseMode::total ? "total" : "new";
}

CaseMode parse_case_mode(std::string_view name) {
    if (name == "total") {
        return CaseMode::total;
    }
    if (name == "new") {
        return CaseMode::new_cases;
    }
    throw FormatError("unknown case mode '" + std::string(name) + "' (expected total or new)");
}

std::optional<std::int64_t> CaseSeries::on(Date d) const {
    if (counts.empty() || d < start || d > end()) {
        return std::nullopt;
    }
    return counts[static_cast<std::size_t>((d - start).count())];
}

namespace {

std::string trimmed_ascii(std::string_view s) {
    const std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const std::size_t e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

CaseParseResult parse_case_csv_long(std::istream& in) {
    const auto header = csv::read_row(in);
    if (!header) {
        throw EmptyInputError("case CSV is empty");
    }
    int date_col = -1;
    int country_col = -1;
    int total_col = -1;
    for (std::size_t i = 0; i < header->size(); ++i) {
        std::string name = trimmed_ascii((*header)[i]);
        if (i == 0 && name.starts_with("\xEF\xBB\xBF")) {
            name.erase(0, 3);
        }
        if (name == "date") {
            date_col = static_cast<int>(i);
        } else if (name == "country") {
            country_col = static_cast<int>(i);
        } else if (name == "total_cases") {
            total_col = static_cast<int>(i);
        }
    }
    if (date_col < 0 || country_col < 0 || total_col < 0) {
        throw FormatError("case CSV header must contain date,country,total_cases");
    }
    const auto needed = static_cast<std::size_t>(std::max({date_col, country_col, total_col}));

    std::map<Date, std::int64_t> by_date;
    std::string country;
    std::size_t line_no = 1;
    while (auto row = csv::read_row(in)) {
        ++line_no;
        if (row->size() == 1 && trimmed_ascii(row->front()).empty()) {
            continue;
        }
        if (row->size() <= needed) {
            throw FormatError("case CSV line " + std::to_string(line_no) + ": too few columns");
        }
        const Date date = parse_date(trimmed_ascii((*row)[static_cast<std::size_t>(date_col)]));
        const std::string row_country = trimmed_ascii((*row)[static_cast<std::size_t>(country_col)]);
        const auto value = csv::parse_int(trimmed_ascii((*row)[static_cast<std::size_t>(total_col)]));
        if (!value || *value < 0) {
            throw FormatError("case CSV line " + std::to_string(line_no) + ": total_cases must be a nonnegative integer");
        }
        if (country.empty()) {
            country = row_country;
        } else if (row_country != country) {
            throw FormatError("case CSV mixes countries '" + country + "' and '" + row_country + "'");
        }
        const auto [it, inserted] = by_date.emplace(date, *value);
        if (!inserted && it->second != *value) {
            throw FormatError("case CSV has conflicting values for " + format_date(date));
        }
    }
    if (by_date.empty()) {
        throw EmptyInputError("case CSV has no data rows");
    }

    CaseParseResult result;
    result.series.country = country;
    result.series.mode = CaseMode::total;
    result.series.start = by_date.begin()->first;
    const Date last = by_date.rbegin()->first;
    std::int64_t previous = 0;
    for (Date d = result.series.start; d <= last; d += std::chrono::days{1}) {
        if (const auto it = by_date.find(d); it != by_date.end()) {
            previous = it->second;
        } else {
            result.warnings.push_back("missing " + format_date(d) + " forward-filled with " + std::to_string(previous));
        }
        result.series.counts.push_back(previous);
    }
    return result;
}

namespace {

Date parse_jhu_date(std::string_view s) {
    const std::size_t a = s.find('/');
    const std::size_t b = a == std::string_view::npos ? a : s.find('/', a + 1);
    if (b == std::string_view::npos) {
        throw FormatError("JHU date column '" + std::string(s) + "' is not M/D/YY");
    }
    const auto m = csv::parse_int(s.substr(0, a));
    const auto d = csv::parse_int(s.substr(a + 1, b - a - 1));
    auto y = csv::parse_int(s.substr(b + 1));
    if (!m || !d || !y) {
        throw FormatError("JHU date column '" + std::string(s) + "' is not M/D/YY");
    }
    if (*y < 100) {
        *y += 2000;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(*y)},
                                          std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) {
        throw FormatError("JHU date column '" + std::string(s) + "' is not a valid date");
    }
    return std::chrono::sys_days{ymd};
}

}  // namespace

CaseSeries parse_case_csv_jhu_wide(std::istream& in, std::string_view country) {
    const auto header = csv::read_row(in);
    if (!header || header->size() < 5) {
        throw FormatError("JHU CSV needs Province/State,Country/Region,Lat,Long and at least one date column");
    }
    std::string first = trimmed_ascii((*header)[0]);
    if (first.starts_with("\xEF\xBB\xBF")) {
        first.erase(0, 3);
    }
    const std::string long_col = trimmed_ascii((*header)[3]);
    if (first != "Province/State" || trimmed_ascii((*header)[1]) != "Country/Region" ||
        trimmed_ascii((*header)[2]) != "Lat" || (long_col != "Long" && long_col != "Long_")) {
        throw FormatError("JHU CSV header must start with Province/State,Country/Region,Lat,Long");
    }
    std::vector<Date> dates;
    for (std::size_t i = 4; i < header->size(); ++i) {
        dates.push_back(parse_jhu_date(trimmed_ascii((*header)[i])));
        if (dates.size() > 1 && dates.back() != dates[dates.size() - 2] + std::chrono::days{1}) {
            throw FormatError("JHU CSV date columns are not consecutive at " + format_date(dates.back()));
        }
    }

    CaseSeries series;
    series.country = std::string(country);
    series.start = dates.front();
    series.mode = CaseMode::total;
    series.counts.assign(dates.size(), 0);
    bool found = false;
    std::size_t line_no = 1;
    while (auto row = csv::read_row(in)) {
        ++line_no;
        if (row->size() < 2 || trimmed_ascii((*row)[1]) != country) {
            continue;
        }
        if (row->size() != header->size()) {
            throw FormatError("JHU CSV line " + std::to_string(line_no) + ": column count mismatch");
        }
        found = true;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            const auto value = csv::parse_int(trimmed_ascii((*row)[i + 4]));
            if (!value || *value < 0) {
                throw FormatError("JHU CSV line " + std::to_string(line_no) + ": non-numeric cell '" + (*row)[i + 4] +
                                  "'");
            }
            series.counts[i] += *value;
        }
    }
    if (!found) {
        throw NotFoundError("country '" + std::string(country) + "' not present in JHU CSV");
    }
    return series;
}

CaseSeries derive_new_cases(const CaseSeries& totals) {
    if (totals.mode != CaseMode::total) {
        throw ContractError("derive_new_cases expects a total-mode series");
    }
    CaseSeries out = totals;
    out.mode = CaseMode::new_cases;
    for (std::size_t t = 1; t < totals.counts.size(); ++t) {
        out.counts[t] = totals.counts[t] - totals.counts[t - 1];
    }
    return out;
}

CaseSeries cumulative_sum(const CaseSeries& daily) {
    if (daily.mode != CaseMode::new_cases) {
        throw ContractError("cumulative_sum expects a new-mode series");
    }
    CaseSeries out = daily;
    out.mode = CaseMode::total;
    for (std::size_t t = 1; t < out.counts.size(); ++t) {
        out.counts[t] += out.counts[t - 1];
    }
    return out;
}

}  // namespace epialign::corpus
