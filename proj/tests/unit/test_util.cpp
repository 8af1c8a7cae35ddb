#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epialign/config.hpp"
#include "epialign/csv.hpp"
#include "epialign/date.hpp"
#include "epialign/digest.hpp"
#include "epialign/error.hpp"
#include "epialign/text.hpp"

using namespace epialign;

TEST_SUITE("date") {

TEST_CASE("dates and instants") {
    CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
    CHECK_THROWS_AS(parse_date("2020-02-30"), FormatError);
    CHECK_THROWS_AS(parse_date("2020-2-1"), FormatError);
    CHECK_THROWS_AS(parse_date("2021-02-29"), FormatError);
    CHECK(format_instant(parse_instant("2020-02-01T10:00:00Z")) == "2020-02-01T10:00:00Z");
    CHECK(format_instant(parse_instant("2020-02-01T10:00:00.987+02:00")) == "2020-02-01T08:00:00Z");
    CHECK(format_instant(parse_instant("2020-02-01T00:30:00-0100")) == "2020-02-01T01:30:00Z");
    CHECK(format_instant(parse_instant("2020-02-01 10:00:00")) == "2020-02-01T10:00:00Z");
    CHECK(format_instant(parse_instant("2020-02-01")) == "2020-02-01T00:00:00Z");
    CHECK_THROWS_AS(parse_instant("2020-02-01X"), FormatError);
    CHECK_THROWS_AS(parse_instant("2020-02-01T25:00:00Z"), FormatError);
    CHECK(calendar_date(parse_instant("2020-02-01T23:59:59Z")) == parse_date("2020-02-01"));
    CHECK(calendar_date(parse_instant("2020-02-01T23:00:00Z"), std::chrono::minutes{60}) == parse_date("2020-02-02"));
}

TEST_CASE("date ranges") {
    const DateRange r = parse_date_range("2020-02-01:2020-04-30");
    CHECK(r.size() == 90);
    CHECK(parse_date_range("2020-02-01..2020-02-29").size() == 29);
    CHECK(format_date_range(r) == "2020-02-01:2020-04-30");
    CHECK(r.days().front() == r.first);
    CHECK(r.days().back() == r.last);
    CHECK_THROWS(parse_date_range("2020-03-01:2020-02-01"));
    CHECK_THROWS_AS(parse_date_range("2020-03-01"), FormatError);
}

}  // TEST_SUITE

TEST_SUITE("csv") {

TEST_CASE("rows") {
    std::istringstream in("a,\"b,c\",\"d\"\"e\"\r\n\"multi\nline\",x\n\nlast");
    CHECK(*csv::read_row(in) == csv::Row{"a", "b,c", "d\"e"});
    CHECK(*csv::read_row(in) == csv::Row{"multi\nline", "x"});
    CHECK(*csv::read_row(in) == csv::Row{""});
    CHECK(*csv::read_row(in) == csv::Row{"last"});
    CHECK_FALSE(csv::read_row(in).has_value());

    std::ostringstream out;
    csv::write_row(out, {"plain", "with,comma", "with \"quote\"", ""});
    CHECK(out.str() == "plain,\"with,comma\",\"with \"\"quote\"\"\",\n");
}

TEST_CASE("numbers") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(*csv::parse_double(csv::format_double(0.1 + 0.2)) == 0.1 + 0.2);
    CHECK(csv::format_fixed(-0.0000001, 6) == "0.000000");
    CHECK(csv::format_fixed(0.9999996, 6) == "1.000000");
    CHECK_FALSE(csv::parse_double("1.5x").has_value());
    CHECK_FALSE(csv::parse_double("").has_value());
    CHECK(*csv::parse_int("-12") == -12);
    CHECK_FALSE(csv::parse_int("12.0").has_value());
}

}  // TEST_SUITE

TEST_SUITE("text") {

TEST_CASE("normalization helpers") {
    CHECK(text::nfc("citta\xCC\x80") == "citt\xC3\xA0");
    CHECK(text::casefold("STRASSE Straße") == "strasse strasse");
    CHECK(text::trim("\xE3\x80\x80  ciao\t\n") == "ciao");  // ideographic space
    CHECK(text::trim("   ").empty());
    CHECK(text::canonical("  citta\xCC\x80 ") == "citt\xC3\xA0");
    CHECK(text::contains_ascii_ci("see HTTPS://x", "https://"));
    CHECK_FALSE(text::contains_ascii_ci("http:/", "http://"));
    CHECK(text::primary_language("pt-BR") == "pt");
    CHECK(text::primary_language("TH") == "th");
    CHECK(text::code_points("aà日").size() == 3);
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("shipped example configs load") {
    const std::filesystem::path dir = EPIALIGN_CONFIG_DIR;
    {
        std::ifstream in(dir / "filter_it.json");
        const auto f = config::read_filter_config(in, dir);
        CHECK(f.filter.language == "it");
        CHECK(f.country == "Italy");
        CHECK(f.filter.country_lexicon.size() == 10);
    }
    {
        std::ifstream in(dir / "features_embedding.json");
        const auto f = config::read_feature_config(in, dir);
        REQUIRE(f.features.keywords.has_value());
        CHECK(f.features.keywords->keywords.size() == 5);
        CHECK(f.features.embedding->pooling == features::Pooling::max);
    }
    {
        std::ifstream in(dir / "svr_poly.json");
        const auto p = config::read_svr_params(in);
        CHECK(p.kernel.kind == regress::KernelKind::polynomial);
        CHECK_FALSE(p.kernel.gamma.has_value());
        CHECK(p.kernel.coef0 == 1.0);
    }
    {
        std::ifstream in(dir / "experiment_it.json");
        const auto e = config::read_experiment_config(in, dir);
        CHECK(e.time_setting.name == experiment::SettingName::III);
        CHECK(e.svr_params.kernel.kind == regress::KernelKind::linear);
        CHECK(e.domestic());
    }
    {
        std::ifstream in(dir / "keywords_it.json");
        CHECK(features::parse_keyword_spec(in).keywords.front() == "lockdown");
    }
}

TEST_CASE("config errors") {
    std::istringstream no_lang(R"({"country_lexicon": ["x"]})");
    CHECK_THROWS_AS(config::read_filter_config(no_lang, "."), FormatError);
    std::istringstream bad_type(R"({"language": "it", "drop_retweets": "yes"})");
    CHECK_THROWS_AS(config::read_filter_config(bad_type, "."), FormatError);
    std::istringstream bad_kernel(R"({"kernel": {"kind": "rbf", "gamma": "auto"}})");
    CHECK_THROWS_AS(config::read_svr_params(bad_kernel), FormatError);
    std::istringstream bad_c(R"({"C": -1})");
    CHECK_THROWS_AS(config::read_svr_params(bad_c), FormatError);
    std::istringstream no_features(R"({"use_tweet_frequency": false})");
    CHECK_THROWS_AS(config::read_feature_config(no_features, "."), FormatError);
    std::istringstream missing_file(R"({"keywords_file": "does-not-exist.json"})");
    CHECK_THROWS_AS(config::read_feature_config(missing_file, "."), FormatError);
    std::istringstream custom(R"({"source_country": "Italy", "setting": {"train": ["2020-02-01:2020-02-10"],
        "test": ["2020-02-05:2020-02-20"]}, "features": {"use_tweet_frequency": true}})");
    const auto e = config::read_experiment_config(custom, ".");
    CHECK(e.time_setting.name == experiment::SettingName::custom);
    CHECK(e.time_setting.overlapping());
    CHECK(e.target_country == "Italy");
}

}  // TEST_SUITE

TEST_SUITE("digest") {

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    const auto path = std::filesystem::temp_directory_path() / "epialign_digest_test.txt";
    std::ofstream(path, std::ios::binary) << "abc";
    CHECK(sha256_file(path) == sha256_hex("abc"));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(sha256_file("/nonexistent/file"), IoError);
}

}  // TEST_SUITE
