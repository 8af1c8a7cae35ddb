#include "epialign/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace epialign::synthetic {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr std::array<const char*, 12> kFillers{
    "oggi", "domani", "casa", "famiglia", "scuola", "lavoro", "notizie", "governo", "ospedale", "amici", "città", "sera",
};

}  // namespace

Rng::Rng(std::uint64_t seed) {
    for (auto& s : s_) {
        s = splitmix64(seed);
    }
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Country make_country(const CountryParams& p) {
    Rng rng(p.seed);
    Country out;
    out.cases.country = p.country;
    out.cases.start = p.start;
    out.cases.mode = corpus::CaseMode::total;
    std::int64_t previous = 0;
    std::size_t serial = 0;
    for (int d = 0; d < p.days; ++d) {
        const double logistic = p.peak_total / (1.0 + std::exp(-(d - p.onset_day) / p.width_days));
        const std::int64_t total = std::max(previous, static_cast<std::int64_t>(std::llround(logistic)));
        previous = total;
        out.cases.counts.push_back(total);

        const double mean_kw = p.kw_base + static_cast<double>(total) / p.kw_per_cases;
        const auto kw = static_cast<std::int64_t>(std::max(0.0, std::round(mean_kw * (1.0 + p.noise * rng.normal()))));
        const std::int64_t background = rng.between(p.background_lo, p.background_hi);
        const Date date = p.start + std::chrono::days{d};
        const auto emit = [&](std::string text) {
            corpus::Tweet t;
            t.id = p.country + "-" + std::to_string(serial++);
            t.timestamp = Instant{date} + std::chrono::seconds{rng.between(0, 86399)};
            t.lang = p.lang;
            t.text = std::move(text);
            t.is_retweet = false;
            out.tweets.push_back(std::move(t));
        };
        for (std::int64_t k = 0; k < kw; ++k) {
            emit(p.keyword + " " + kFillers[rng.next() % kFillers.size()] + " #" + std::to_string(serial));
        }
        for (std::int64_t k = 0; k < background; ++k) {
            emit(std::string(kFillers[rng.next() % kFillers.size()]) + " " + kFillers[rng.next() % kFillers.size()] +
                 " #" + std::to_string(serial));
        }
    }
    std::stable_sort(out.tweets.begin(), out.tweets.end(),
                     [](const corpus::Tweet& a, const corpus::Tweet& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::vector<corpus::Tweet> make_noisy_corpus(std::size_t n, const std::string& lang,
                                             const std::vector<std::string>& other_countries, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<corpus::Tweet> out;
    out.reserve(n);
    const Date start = std::chrono::sys_days{std::chrono::year{2020} / 2 / 1};
    for (std::size_t i = 0; i < n; ++i) {
        corpus::Tweet t;
        t.id = std::to_string(i);
        t.timestamp = Instant{start} + std::chrono::seconds{rng.between(0, 89 * 86400)};
        t.lang = lang;
        std::string body = std::string(kFillers[rng.next() % kFillers.size()]) + " " +
                           kFillers[rng.next() % kFillers.size()] + " " + std::to_string(rng.between(0, 400));
        switch (rng.next() % 10) {
            case 0: t.lang = rng.uniform() < 0.5 ? "en" : "es"; break;
            case 1: body = rng.uniform() < 0.5 ? "" : " \t "; break;
            case 2:
                if (rng.uniform() < 0.5) {
                    t.is_retweet = true;
                } else {
                    body = "RT @utente " + body;
                }
                break;
            case 3: body += rng.uniform() < 0.5 ? " https://t.co/x" : " HTTP://example.org"; break;
            case 4:
                if (!other_countries.empty()) {
                    std::string name = other_countries[rng.next() % other_countries.size()];
                    if (rng.uniform() < 0.5 && !name.empty()) {
                        std::transform(name.begin(), name.end(), name.begin(),
                                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
                    }
                    body += " " + name;
                }
                break;
            default: break;  // plain; small body space makes exact duplicates common
        }
        if (rng.uniform() < 0.1) {
            body = "  " + body + " ";
        }
        t.text = body;
        if (!t.is_retweet && rng.uniform() < 0.5) {
            t.is_retweet = false;
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace epialign::synthetic
