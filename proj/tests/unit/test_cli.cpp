#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epialign/cli.hpp"
#include "epialign/corpus.hpp"
#include "epialign/embedding_store.hpp"

namespace fs = std::filesystem;
using epialign::cli::run;

namespace {

const fs::path kFixtures = EPIALIGN_FIXTURES;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Fresh scratch directory, removed when the test ends.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) {
        dir = fs::temp_directory_path() / ("epialign_test_" + name + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fx(const char* name) { return (kFixtures / name).string(); }

/// filter + featurize one fixture country into `dir`.
std::string featurize_country(const Scratch& s, const std::string& stem, const char* tweets, const char* filter,
                              const char* config = "features_mock8.json") {
    REQUIRE(cli({"filter", fx(tweets), "--config", fx(filter), "--out", s / (stem + ".jsonl")}).code == 0);
    const std::string out = s / (stem + ".features.csv");
    std::vector<std::string> args{"featurize", s / (stem + ".jsonl"), "--features", fx(config), "--out", out};
    if (std::string(config) == "features_mock8.json") {
        args.insert(args.end(), {"--mock-dim", "8"});
    }
    REQUIRE(cli(args).code == 0);
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"transfer", "--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"--version"}).out.find("0.1.0") != std::string::npos);
}

TEST_CASE("filter writes output, stats and manifest") {
    Scratch s("filter");
    const Run r = cli({"filter", fx("noisy_tweets.jsonl"), "--config", fx("filter_it.json"), "--out", s / "out.jsonl",
                       "--stats", s / "stats.json"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("1 malformed") != std::string::npos);
    std::istringstream kept(slurp(s / "out.jsonl"));
    const auto tweets = epialign::corpus::parse_tweet_jsonl(kept).tweets;
    REQUIRE(tweets.size() == 2);
    CHECK(tweets[0].id == "1");
    CHECK(tweets[1].id == "9");

    const auto stats = nlohmann::json::parse(slurp(s / "stats.json"));
    CHECK(stats["kind"] == "filter_stats");
    CHECK(stats["pre_count"] == 9);
    CHECK(stats["post_count"] == 2);
    CHECK(stats["removed_by_reason"]["duplicate"] == 1);
    CHECK(stats["removed_by_reason"]["hyperlink"] == 1);
    CHECK(stats["removed_by_reason"]["retweet"] == 2);
    CHECK(stats["removed_by_reason"]["wrong_language"] == 1);
    CHECK(stats["removed_by_reason"]["other_country"] == 1);
    CHECK(stats["removed_by_reason"]["empty_text"] == 1);

    const auto manifest = nlohmann::json::parse(slurp(s / "out.jsonl.manifest.json"));
    CHECK(manifest["command"] == "filter");
    CHECK(manifest["tool_version"] == epialign::cli::kToolVersion);
    CHECK(manifest["inputs"].size() == 2);
    CHECK(manifest["inputs"][0]["sha256"].get<std::string>().size() == 64);
    CHECK(manifest.contains("timestamp"));
    CHECK(manifest["config"]["filter"]["language"] == "it");
}

TEST_CASE("filter: missing input leaves no outputs") {
    Scratch s("missing");
    const Run r = cli({"filter", s / "nope.jsonl", "--config", fx("filter_it.json"), "--out", s / "out.jsonl",
                       "--stats", s / "stats.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.jsonl") != std::string::npos);
    CHECK(fs::is_empty(s.dir));
}

TEST_CASE("filter: bad config is a usage error") {
    Scratch s("badcfg");
    std::ofstream(s / "cfg.json") << "{\"language\": ";
    CHECK(cli({"filter", fx("noisy_tweets.jsonl"), "--config", s / "cfg.json", "--out", s / "o.jsonl"}).code == 2);
    CHECK_FALSE(fs::exists(s / "o.jsonl"));
}

TEST_CASE("filter: empty input") {
    Scratch s("empty");
    std::ofstream(s / "in.jsonl").close();
    REQUIRE(cli({"filter", s / "in.jsonl", "--config", fx("filter_it.json"), "--out", s / "o.jsonl", "--stats",
                 s / "st.json"})
                .code == 0);
    CHECK(slurp(s / "o.jsonl").empty());
    const auto stats = nlohmann::json::parse(slurp(s / "st.json"));
    CHECK(stats["pre_count"] == 0);
    CHECK(stats["post_count"] == 0);
}

TEST_CASE("featurize columns, empty days and manifest") {
    Scratch s("featurize");
    REQUIRE(cli({"filter", fx("noisy_tweets.jsonl"), "--config", fx("filter_it.json"), "--out", s / "f.jsonl"}).code ==
            0);
    REQUIRE(cli({"featurize", s / "f.jsonl", "--features", fx("features_mock8.json"), "--mock-dim", "8", "--range",
                 "2020-02-01:2020-02-04", "--out", s / "f.csv"})
                .code == 0);
    const std::string csv = slurp(s / "f.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "date,tweet_count,empty_day,freq,kw:lockdown,emb:0,emb:1,emb:2,emb:3,emb:4,emb:5,emb:6,emb:7");
    CHECK(std::count(header.begin(), header.end(), ',') == 12);
    CHECK(csv.find("\n2020-02-02,0,1,0,0,0,0,0,0,0,0,0,0\n") != std::string::npos);
    CHECK(csv.find("\n2020-02-03,1,0,1,1,") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(s / "f.csv.manifest.json"));
    CHECK(manifest["command"] == "featurize");
    CHECK(manifest["missing_embeddings"] == 0);
    CHECK(manifest["config"]["range"] == "2020-02-01:2020-02-04");
}

TEST_CASE("featurize: store with missing ids and dimension conflicts") {
    Scratch s("store");
    REQUIRE(cli({"filter", fx("italy_tweets.jsonl"), "--config", fx("filter_it.json"), "--out", s / "f.jsonl"}).code ==
            0);
    std::ifstream in(s / "f.jsonl");
    const auto tweets = epialign::corpus::parse_tweet_jsonl(in).tweets;
    REQUIRE(tweets.size() > 10);
    epialign::features::EmbeddingStore store(8);
    for (std::size_t i = 3; i < tweets.size(); ++i) {
        const float v[8] = {static_cast<float>(i), 1, 2, 3, 4, 5, 6, 7};
        store.insert(tweets[i].id, v);
    }
    {
        std::ofstream out(s / "store.emb", std::ios::binary);
        epialign::features::write_embedding_store(store, out);
    }
    const Run r = cli({"featurize", s / "f.jsonl", "--features", fx("features_mock8.json"), "--emb", s / "store.emb",
                       "--out", s / "f.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("3 tweet(s) missing") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(s / "f.csv.manifest.json"));
    CHECK(manifest["missing_embeddings"] == 3);

    CHECK(cli({"featurize", s / "f.jsonl", "--features", fx("features_mock8.json"), "--mock-dim", "4", "--out",
               s / "g.csv"})
              .code == 2);
    CHECK_FALSE(fs::exists(s / "g.csv"));
    CHECK(cli({"featurize", s / "f.jsonl", "--features", fx("features_mock8.json"), "--mock-dim", "8", "--emb",
               s / "store.emb", "--out", s / "g.csv"})
              .code == 2);

    std::string corrupt = slurp(s / "store.emb");
    corrupt[0] = 'X';
    std::ofstream(s / "bad.emb", std::ios::binary) << corrupt;
    const Run bad = cli({"featurize", s / "f.jsonl", "--features", fx("features_mock8.json"), "--emb", s / "bad.emb",
                         "--out", s / "g.csv"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("offset 0") != std::string::npos);
}

TEST_CASE("transfer on bundled fixtures, setting V") {
    // Keyword counts are an exact monotone function of the fixture case curve.
    Scratch s("transfer");
    const std::string it = featurize_country(s, "Italy", "italy_tweets.jsonl", "filter_it.json", "features_keyword.json");
    const std::string es = featurize_country(s, "Spain", "spain_tweets.jsonl", "filter_es.json", "features_keyword.json");
    const Run domestic = cli({"transfer", "--source-features", it, "--source-cases", fx("italy_cases.csv"),
                              "--target-features", it, "--target-cases", fx("italy_cases.csv"), "--setting", "V",
                              "--svr", fx("svr_linear.json"), "--out", s / "it_it.json"});
    REQUIRE(domestic.code == 0);
    CHECK(std::stod(domestic.out) >= 0.99);
    CHECK(domestic.out.size() == std::string("0.999999\n").size());
    CHECK(domestic.err.find("upper bound") != std::string::npos);

    const Run transfer = cli({"transfer", "--source-features", it, "--source-cases", fx("italy_cases.csv"),
                              "--target-features", es, "--target-cases", fx("spain_cases.csv"), "--setting", "V",
                              "--svr", fx("svr_linear.json"), "--out", s / "it_es.json"});
    REQUIRE(transfer.code == 0);
    CHECK(std::stod(transfer.out) >= 0.8);
    const auto doc = nlohmann::json::parse(slurp(s / "it_es.json"));
    CHECK(doc["source_country"] == "Italy");
    CHECK(doc["target_country"] == "Spain");
    CHECK(doc["setting"] == "V");
    CHECK(doc["n_test"] == 90);
}

TEST_CASE("transfer errors") {
    Scratch s("transfer_err");
    const std::string it = featurize_country(s, "Italy", "italy_tweets.jsonl", "filter_it.json");
    const Run vi = cli({"transfer", "--source-features", it, "--source-cases", fx("italy_cases.csv"),
                        "--target-features", it, "--target-cases", fx("italy_cases.csv"), "--setting", "VI"});
    CHECK(vi.code == 2);
    CHECK(vi.err.find("I, II, III, IV, V") != std::string::npos);

    // Flat case counts make training degenerate.
    std::ofstream flat(s / "flat.csv");
    flat << "date,country,total_cases\n";
    for (int d = 1; d <= 29; ++d) flat << "2020-02-" << (d < 10 ? "0" : "") << d << ",Italy,5\n";
    for (int d = 1; d <= 31; ++d) flat << "2020-03-" << (d < 10 ? "0" : "") << d << ",Italy," << d << "\n";
    flat.close();
    const Run degenerate = cli({"transfer", "--source-features", it, "--source-cases", s / "flat.csv",
                                "--target-features", it, "--target-cases", s / "flat.csv", "--setting", "III",
                                "--out", s / "r.json"});
    CHECK(degenerate.code == 3);
    CHECK_FALSE(degenerate.err.empty());
    CHECK_FALSE(fs::exists(s / "r.json"));
}

TEST_CASE("train, predict and eval") {
    Scratch s("train");
    const std::string it = featurize_country(s, "Italy", "italy_tweets.jsonl", "filter_it.json");
    REQUIRE(cli({"train", "--features", it, "--cases", fx("italy_cases.csv"), "--setting", "I", "--svr",
                 fx("svr_linear.json"), "--out", s / "model.json"})
                .code == 0);
    CHECK(fs::exists(s / "model.json.manifest.json"));
    REQUIRE(cli({"predict", "--model", s / "model.json", "--features", it, "--range", "2020-04-01:2020-04-30",
                 "--out", s / "pred.csv"})
                .code == 0);
    const std::string pred = slurp(s / "pred.csv");
    CHECK(pred.starts_with("date,prediction\n2020-04-01,"));
    CHECK(std::count(pred.begin(), pred.end(), '\n') == 31);

    const Run same = cli({"eval", "--pred", s / "pred.csv", "--truth", s / "pred.csv"});
    CHECK(same.code == 0);
    CHECK(same.out == "1.000000\n");

    const Run vs_truth = cli({"eval", "--pred", s / "pred.csv", "--truth", fx("italy_cases.csv"), "--truth-column",
                              "total_cases"});
    CHECK(vs_truth.code == 0);
    CHECK(std::stod(vs_truth.out) > 0.5);
    CHECK(vs_truth.err.find("matching rows") != std::string::npos);

    const Run to_stdout = cli({"predict", "--model", s / "model.json", "--features", it});
    CHECK(to_stdout.code == 0);
    CHECK(std::count(to_stdout.out.begin(), to_stdout.out.end(), '\n') == 91);
}

TEST_CASE("jhu case input") {
    Scratch s("jhu");
    std::ofstream(s / "f.csv") << "date,tweet_count,empty_day,freq\n2020-02-01,1,0,1\n2020-02-02,2,0,2\n"
                                  "2020-02-03,4,0,4\n";
    const Run r = cli({"train", "--features", s / "f.csv", "--cases", fx("jhu_wide.csv"), "--case-format", "jhu",
                       "--country", "Japan", "--range", "2020-02-01:2020-02-03", "--out", s / "m.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("trained on 3 days") != std::string::npos);
    CHECK(cli({"train", "--features", s / "f.csv", "--cases", fx("jhu_wide.csv"), "--case-format", "jhu",
               "--country", "Atlantis", "--out", s / "m2.json"})
              .code == 2);
}

TEST_CASE("report: tables, determinism, empty dir") {
    Scratch s("report");
    const std::string it = featurize_country(s, "Italy", "italy_tweets.jsonl", "filter_it.json");
    const std::string es = featurize_country(s, "Spain", "spain_tweets.jsonl", "filter_es.json");
    fs::create_directories(s.dir / "results");
    for (const char* setting : {"I", "II", "III", "IV", "V"}) {
        for (const char* mode : {"total", "new"}) {
            const std::string name = std::string("it_es_") + setting + "_" + mode + ".json";
            REQUIRE(cli({"transfer", "--source-features", it, "--source-cases", fx("italy_cases.csv"),
                         "--target-features", es, "--target-cases", fx("spain_cases.csv"), "--setting", setting,
                         "--case-mode", mode, "--label", "mock", "--out", (s.dir / "results" / name).string()})
                        .code == 0);
        }
    }
    fs::copy_file(it, s.dir / "results" / "Italy.features.csv");
    REQUIRE(cli({"filter", fx("noisy_tweets.jsonl"), "--config", fx("filter_it.json"), "--out", s / "n.jsonl",
                 "--stats", (s.dir / "results" / "italy.stats.json").string()})
                .code == 0);

    REQUIRE(cli({"report", (s.dir / "results").string(), "--out", s / "rep1"}).code == 0);
    REQUIRE(cli({"report", (s.dir / "results").string(), "--out", s / "rep2"}).code == 0);
    for (const char* f : {"transfer_table_total.csv", "transfer_table_new.csv", "frequency_timeline.csv",
                          "filter_stats.csv", "metadata.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(s.dir / "rep1" / f));
        CHECK(slurp(s.dir / "rep1" / f) == slurp(s.dir / "rep2" / f));
    }
    const std::string total = slurp(s.dir / "rep1" / "transfer_table_total.csv");
    CHECK(total.starts_with("source,embed,setting,Spain\nItaly,mock,I,"));
    CHECK(std::count(total.begin(), total.end(), '\n') == 6);
    CHECK(slurp(s.dir / "rep1" / "filter_stats.csv").starts_with("metric,Italy\nPre,9\nPost,2\n"));
    CHECK(slurp(s.dir / "rep1" / "frequency_timeline.csv").starts_with("date,Italy\n2020-02-01,"));

    fs::create_directories(s.dir / "none");
    CHECK(cli({"report", (s.dir / "none").string(), "--out", s / "rep3"}).code == 3);
    CHECK(cli({"report", s / "missing", "--out", s / "rep3"}).code == 2);
}

TEST_CASE("transfer is byte-identical across runs and thread counts") {
    Scratch s("determinism");
    const std::string it = featurize_country(s, "Italy", "italy_tweets.jsonl", "filter_it.json");
    const std::string es = featurize_country(s, "Spain", "spain_tweets.jsonl", "filter_es.json");
    const auto go = [&](const std::string& out, const char* threads) {
        return cli({"--seed", "0", "--threads", threads, "transfer", "--source-features", it, "--source-cases",
                    fx("italy_cases.csv"), "--target-features", es, "--target-cases", fx("spain_cases.csv"),
                    "--setting", "II", "--out", out});
    };
    REQUIRE(go(s / "a.json", "1").code == 0);
    REQUIRE(go(s / "b.json", "4").code == 0);
    CHECK(slurp(s / "a.json") == slurp(s / "b.json"));

    REQUIRE(cli({"--threads", "4", "featurize", s / "Italy.jsonl", "--features", fx("features_mock8.json"),
                 "--mock-dim", "8", "--out", s / "again.csv"})
                .code == 0);
    CHECK(slurp(s / "again.csv") == slurp(it));
}

}  // TEST_SUITE
