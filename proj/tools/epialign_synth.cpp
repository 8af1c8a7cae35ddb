// Writes a synthetic country (tweets JSONL + long-format case CSV) for demos
// and manual testing of the pipeline.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "epialign/corpus.hpp"
#include "epialign/csv.hpp"
#include "epialign/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic tweet corpus with linked case counts", "epialign_synth"};
    epialign::synthetic::CountryParams p;
    std::string tweets_path;
    std::string cases_path;
    app.add_option("--country", p.country)->capture_default_str();
    app.add_option("--lang", p.lang)->capture_default_str();
    app.add_option("--onset", p.onset_day, "day index of the logistic midpoint")->capture_default_str();
    app.add_option("--peak", p.peak_total)->capture_default_str();
    app.add_option("--noise", p.noise)->capture_default_str();
    app.add_option("--keyword", p.keyword)->capture_default_str();
    app.add_option("--kw-per-cases", p.kw_per_cases, "cases per extra keyword tweet")->capture_default_str();
    app.add_option("--background-lo", p.background_lo)->capture_default_str();
    app.add_option("--background-hi", p.background_hi)->capture_default_str();
    app.add_option("--seed", p.seed)->capture_default_str();
    app.add_option("--tweets", tweets_path, "output tweets JSONL")->required();
    app.add_option("--cases", cases_path, "output case CSV")->required();
    CLI11_PARSE(app, argc, argv);

    const auto country = epialign::synthetic::make_country(p);
    std::ofstream tweets(tweets_path, std::ios::binary);
    std::ofstream cases(cases_path, std::ios::binary);
    if (!tweets || !cases) {
        std::cerr << "error: cannot open outputs\n";
        return 2;
    }
    epialign::corpus::write_tweet_jsonl(tweets, country.tweets);
    epialign::csv::write_row(cases, {"date", "country", "total_cases"});
    for (std::size_t i = 0; i < country.cases.counts.size(); ++i) {
        const auto date = country.cases.start + std::chrono::days{static_cast<int>(i)};
        epialign::csv::write_row(cases, {epialign::format_date(date), p.country,
                                         std::to_string(country.cases.counts[i])});
    }
    std::cout << "wrote " << country.tweets.size() << " tweets and " << country.cases.counts.size() << " days\n";
    return 0;
}
