#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epialign/corpus.hpp"
#include "epialign/date.hpp"

// Synthetic corpora with a known tweet/case link, used by the test suites and
// the fixture generator.
namespace epialign::synthetic {

/// Portable deterministic generator (splitmix64 seeding, xoshiro256**).
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    /// Standard normal (Box-Muller).
    double normal();

private:
    std::uint64_t s_[4];
};

struct CountryParams {
    std::string country = "Italy";
    std::string lang = "it";
    Date start = std::chrono::sys_days{std::chrono::year{2020} / 2 / 1};
    int days = 90;
    /// Day index of the logistic midpoint of the total-case curve.
    double onset_day = 45.0;
    double width_days = 6.0;
    double peak_total = 200000.0;
    /// Keyword tweets per day = kw_base + total / kw_per_cases, times (1 + noise * N(0,1)).
    double kw_base = 5.0;
    double kw_per_cases = 200.0;
    double noise = 0.02;
    /// Background tweets per day (uniform in [lo, hi]).
    int background_lo = 40;
    int background_hi = 60;
    std::string keyword = "lockdown";
    std::uint64_t seed = 1;
};

struct Country {
    std::vector<corpus::Tweet> tweets;
    corpus::CaseSeries cases;  // total mode
};

/// Logistic total-case curve; keyword-tweet volume is a noisy increasing
/// function of the day's total. Tweets are unique, in-language and link-free.
Country make_country(const CountryParams& p);

/// A corpus exercising every filter rule: duplicates, retweets (flagged and
/// "RT @"), links, other-country mentions, wrong language, blank text.
std::vector<corpus::Tweet> make_noisy_corpus(std::size_t n, const std::string& lang,
                                             const std::vector<std::string>& other_countries, std::uint64_t seed);

}  // namespace epialign::synthetic
