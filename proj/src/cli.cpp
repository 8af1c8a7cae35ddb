#include "epialign/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "epialign/config.hpp"
#include "epialign/corpus.hpp"
#include "epialign/csv.hpp"
#include "epialign/digest.hpp"
#include "epialign/embedding_store.hpp"
#include "epialign/error.hpp"
#include "epialign/experiment.hpp"
#include "epialign/features.hpp"
#include "epialign/regress.hpp"
#include "epialign/report.hpp"
#include "epialign/stats.hpp"

namespace epialign::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// File helpers

std::ifstream open_input(const fs::path& path) {
    if (!fs::is_regular_file(path)) {
        throw IoError("input '" + path.string() + "' does not exist or is not a file");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open input '" + path.string() + "'");
    }
    return in;
}

/// Writes through a temporary sibling and renames, so a failed run leaves no
/// partial output behind.
void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write '" + path.string() + "'");
        }
        out << content;
        if (!out) {
            throw IoError("failed writing '" + path.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

std::string timestamp_now() {
    using namespace std::chrono;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr) {
        if (const auto secs = csv::parse_int(epoch)) {
            return format_instant(Instant{seconds{*secs}});
        }
    }
    return format_instant(floor<seconds>(system_clock::now()));
}

struct Manifest {
    std::string command;
    json config = json::object();
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    json extra = json::object();
};

void write_manifest(const Manifest& m, const fs::path& next_to) {
    json inputs = json::array();
    for (const fs::path& p : m.inputs) {
        inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    json outputs = json::array();
    for (const fs::path& p : m.outputs) {
        outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    json doc = {
        {"command", m.command}, {"tool_version", kToolVersion}, {"timestamp", timestamp_now()},
        {"config", m.config},   {"inputs", inputs},             {"outputs", outputs},
    };
    for (const auto& [k, v] : m.extra.items()) {
        doc[k] = v;
    }
    fs::path path = next_to;
    path += ".manifest.json";
    write_file(path, doc.dump(2) + "\n");
}

json to_json(const corpus::FilterConfig& f) {
    return {{"language", f.language},
            {"country_lexicon", f.country_lexicon},
            {"drop_retweets", f.drop_retweets},
            {"drop_hyperlinks", f.drop_hyperlinks},
            {"drop_duplicates", f.drop_duplicates}};
}

json to_json(const features::FeatureConfig& f, std::chrono::minutes offset) {
    json doc = {{"use_tweet_frequency", f.use_tweet_frequency}, {"utc_offset_minutes", offset.count()}};
    if (f.keywords) {
        doc["keywords"] = {{"language", f.keywords->language}, {"keywords", f.keywords->keywords}};
    }
    if (f.embedding) {
        doc["embedding"] = {{"pooling", std::string(features::to_string(f.embedding->pooling))},
                            {"dim", f.embedding->dim}};
    }
    return doc;
}

json to_json(const regress::SvrParams& p) {
    json kernel = {{"kind", std::string(regress::to_string(p.kernel.kind))},
                   {"coef0", p.kernel.coef0},
                   {"degree", p.kernel.degree}};
    kernel["gamma"] = p.kernel.gamma ? json(*p.kernel.gamma) : json("scale");
    json doc = {{"C", p.C}, {"epsilon", p.epsilon}, {"tol", p.tol}, {"seed", p.seed}, {"kernel", kernel}};
    doc["max_passes"] = p.max_passes ? json(*p.max_passes) : json(nullptr);
    return doc;
}

json to_json(const corpus::FilterStats& s) {
    json reasons = json::object();
    for (corpus::RemovalReason r : corpus::kRemovalReasons) {
        reasons[std::string(corpus::to_string(r))] = s.removed_by(r);
    }
    return {{"pre_count", s.pre_count}, {"post_count", s.post_count}, {"removed_by_reason", reasons}};
}

corpus::FilterStats filter_stats_from_json(const json& doc) {
    corpus::FilterStats s;
    s.pre_count = doc.at("pre_count").get<std::size_t>();
    s.post_count = doc.at("post_count").get<std::size_t>();
    const json& reasons = doc.at("removed_by_reason");
    for (corpus::RemovalReason r : corpus::kRemovalReasons) {
        s.removed[static_cast<std::size_t>(r)] = reasons.value(std::string(corpus::to_string(r)), std::size_t{0});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Shared loaders

struct CaseInput {
    fs::path path;
    std::string format = "long";
    std::string country;
};

corpus::CaseSeries load_cases(const CaseInput& in, std::ostream& err) {
    auto stream = open_input(in.path);
    if (in.format == "jhu") {
        if (in.country.empty()) {
            throw FormatError("JHU case files need a country name (Country/Region)");
        }
        return corpus::parse_case_csv_jhu_wide(stream, in.country);
    }
    if (in.format != "long") {
        throw FormatError("unknown case format '" + in.format + "' (expected long or jhu)");
    }
    corpus::CaseParseResult parsed = corpus::parse_case_csv_long(stream);
    for (const std::string& w : parsed.warnings) {
        err << "warning: " << in.path.string() << ": " << w << '\n';
    }
    return parsed.series;
}

features::FeatureTable load_features(const fs::path& path) {
    auto in = open_input(path);
    return features::read_feature_csv(in);
}

regress::SvrParams load_svr(const std::string& path, std::uint64_t seed) {
    regress::SvrParams params;
    if (!path.empty()) {
        auto in = open_input(path);
        params = config::read_svr_params(in);
    }
    params.seed = seed;
    return params;
}

experiment::TimeSetting parse_setting(const std::string& name) {
    return experiment::split_preset(name);
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

std::string format_rho(const std::optional<double>& rho) {
    return report::format_correlation(rho);
}

// ---------------------------------------------------------------------------
// Commands

struct Globals {
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

struct FilterOpts {
    std::string input;
    std::string config;
    std::string out;
    std::string stats;
};

int cmd_filter(const FilterOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
    auto in = open_input(o.input);
    auto cfg_in = open_input(o.config);
    const config::FilterFile cfg = config::read_filter_config(cfg_in, fs::path(o.config).parent_path());

    const corpus::TweetParseResult parsed = corpus::parse_tweet_jsonl(in);
    const corpus::FilterResult result = corpus::filter_corpus(parsed.tweets, cfg.filter, resolve_threads(g.threads));

    std::ostringstream tweets;
    corpus::write_tweet_jsonl(tweets, result.tweets);
    json stats = to_json(result.stats);
    stats["kind"] = "filter_stats";
    stats["country"] = cfg.country.empty() ? cfg.filter.language : cfg.country;
    stats["language"] = cfg.filter.language;
    stats["parse_errors"] = parsed.parse_errors;

    write_file(o.out, tweets.str());
    std::vector<fs::path> outputs{o.out};
    if (!o.stats.empty()) {
        write_file(o.stats, stats.dump(2) + "\n");
        outputs.emplace_back(o.stats);
    }
    if (parsed.parse_errors > 0) {
        err << "warning: skipped " << parsed.parse_errors << " malformed line(s)\n";
    }
    write_manifest({"filter", {{"filter", to_json(cfg.filter)}, {"country", cfg.country}, {"threads", g.threads}},
                    {o.input, o.config}, outputs, {{"stats", stats}}},
                   o.out);
    out << "kept " << result.stats.post_count << " of " << result.stats.pre_count << " tweets\n";
    return kOk;
}

struct FeaturizeOpts {
    std::string input;
    std::string features;
    std::string emb;
    std::size_t mock_dim = 0;
    std::string range = "2020-02-01:2020-04-30";
    std::string out;
};

int cmd_featurize(const FeaturizeOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
    auto in = open_input(o.input);
    auto cfg_in = open_input(o.features);
    const config::FeatureFile cfg = config::read_feature_config(cfg_in, fs::path(o.features).parent_path());
    const DateRange range = parse_date_range(o.range);

    if (!o.emb.empty() && o.mock_dim > 0) {
        throw FormatError("--emb and --mock-dim are mutually exclusive");
    }
    std::optional<features::EmbeddingStore> store;
    std::unique_ptr<features::EmbeddingProvider> provider;
    std::vector<fs::path> inputs{o.input, o.features};
    if (cfg.features.embedding) {
        if (!o.emb.empty()) {
            auto emb_in = open_input(o.emb);
            features::StoreReadResult loaded = features::read_embedding_store(emb_in);
            for (const std::string& w : loaded.warnings) {
                err << "warning: " << o.emb << ": " << w << '\n';
            }
            store.emplace(std::move(loaded.store));
            provider = std::make_unique<features::StoreProvider>(*store);
            inputs.emplace_back(o.emb);
        } else if (o.mock_dim > 0) {
            provider = std::make_unique<features::MockProvider>(o.mock_dim);
        } else {
            throw FormatError("feature config enables embeddings; pass --emb STORE or --mock-dim N");
        }
        if (cfg.features.embedding->dim != 0 && cfg.features.embedding->dim != provider->dim()) {
            throw FormatError("embedding dimension conflict: config says " + std::to_string(cfg.features.embedding->dim) +
                              ", embeddings have " + std::to_string(provider->dim()));
        }
    } else if (!o.emb.empty() || o.mock_dim > 0) {
        throw FormatError("embeddings given but the feature config has no \"embedding\" block");
    }

    const corpus::TweetParseResult parsed = corpus::parse_tweet_jsonl(in);
    const features::FeatureTable table = features::build_feature_table(
        cfg.features, parsed.tweets, range, provider.get(), resolve_threads(g.threads), cfg.utc_offset);

    std::ostringstream csv_out;
    features::write_feature_csv(table, csv_out);
    write_file(o.out, csv_out.str());

    const std::size_t missing = table.missing_embeddings();
    std::size_t empty_days = 0;
    for (const auto& r : table.rows) {
        empty_days += (r.empty_embedding || r.tweet_count == 0) ? 1 : 0;
    }
    if (missing > 0) {
        err << "warning: " << missing << " tweet(s) missing from the embedding store\n";
    }
    if (parsed.parse_errors > 0) {
        err << "warning: skipped " << parsed.parse_errors << " malformed line(s)\n";
    }
    json config_doc = to_json(cfg.features, cfg.utc_offset);
    config_doc["range"] = format_date_range(range);
    config_doc["embedding_source"] = !o.emb.empty() ? "store" : (o.mock_dim > 0 ? "mock" : "none");
    config_doc["mock_dim"] = o.mock_dim;
    write_manifest({"featurize", config_doc, inputs, {o.out},
                    {{"missing_embeddings", missing}, {"empty_days", empty_days},
                     {"parse_errors", parsed.parse_errors}, {"columns", table.names}}},
                   o.out);
    out << "wrote " << table.rows.size() << " days x " << table.dimension() << " features\n";
    return kOk;
}

struct TrainOpts {
    std::string features;
    CaseInput cases;
    std::string setting = "I";
    std::string range;
    std::string case_mode = "total";
    std::string svr;
    std::string out;
};

int cmd_train(const TrainOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
    const features::FeatureTable table = load_features(o.features);
    corpus::CaseSeries cases = load_cases(o.cases, err);
    const corpus::CaseMode mode = corpus::parse_case_mode(o.case_mode);
    if (mode == corpus::CaseMode::new_cases) {
        cases = corpus::derive_new_cases(cases);
    }
    const regress::SvrParams params = load_svr(o.svr, g.seed);
    std::vector<DateRange> train = o.range.empty() ? parse_setting(o.setting).train
                                                   : std::vector<DateRange>{parse_date_range(o.range)};

    regress::Matrix X(0, table.dimension());
    std::vector<double> y;
    for (const features::DayFeatures& row : table.rows) {
        const bool wanted = std::any_of(train.begin(), train.end(), [&](const DateRange& r) { return r.contains(row.date); });
        const auto target = cases.on(row.date);
        if (wanted && target) {
            X.append_row(row.x);
            y.push_back(static_cast<double>(*target));
        }
    }
    if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
        throw DegenerateDataError("training targets have fewer than two distinct values (" + std::to_string(y.size()) +
                                  " aligned days)");
    }
    const regress::SvrModel model = regress::svr_fit(X, y, params);
    std::ostringstream model_out;
    regress::save_model(model, model_out);
    write_file(o.out, model_out.str());
    if (!model.converged) {
        err << "warning: SVR hit the pair-update cap before reaching tol\n";
    }
    std::vector<std::string> train_text;
    for (const DateRange& r : train) train_text.push_back(format_date_range(r));
    write_manifest({"train",
                    {{"svr", to_json(params)}, {"case_mode", o.case_mode}, {"train", train_text},
                     {"case_format", o.cases.format}},
                    {o.features, o.cases.path},
                    {o.out},
                    {{"n_train", y.size()}, {"converged", model.converged}}},
                   o.out);
    out << "trained on " << y.size() << " days, " << model.dual_coefs.size() << " support vectors\n";
    return kOk;
}

struct PredictOpts {
    std::string model;
    std::string features;
    std::string range;
    std::string out;
};

int cmd_predict(const PredictOpts& o, const Globals&, std::ostream& out, std::ostream&) {
    auto model_in = open_input(o.model);
    const regress::SvrModel model = regress::load_model(model_in);
    const features::FeatureTable table = load_features(o.features);
    if (table.dimension() != model.n_features()) {
        throw FormatError("feature table has " + std::to_string(table.dimension()) + " columns, model expects " +
                          std::to_string(model.n_features()));
    }
    const std::optional<DateRange> range =
        o.range.empty() ? std::nullopt : std::optional<DateRange>(parse_date_range(o.range));
    std::ostringstream csv_out;
    csv::write_row(csv_out, {"date", "prediction"});
    for (const features::DayFeatures& row : table.rows) {
        if (range && !range->contains(row.date)) continue;
        csv::write_row(csv_out, {format_date(row.date), csv::format_double(regress::svr_predict(model, row.x))});
    }
    if (o.out.empty()) {
        out << csv_out.str();
        return kOk;
    }
    write_file(o.out, csv_out.str());
    write_manifest({"predict", {{"range", o.range}}, {o.model, o.features}, {o.out}}, o.out);
    return kOk;
}

struct EvalOpts {
    std::string pred;
    std::string truth;
    std::string pred_column;
    std::string truth_column;
};

/// Reads (key, value) pairs from a CSV. Key = `date` column when present,
/// else the row number. Value column = `column` or the last column.
std::map<std::string, double> read_value_column(const std::string& path, const std::string& column) {
    auto in = open_input(path);
    const auto header = csv::read_row(in);
    if (!header || header->empty()) {
        throw FormatError("'" + path + "' has no header");
    }
    std::size_t value_col = header->size() - 1;
    if (!column.empty()) {
        const auto it = std::find(header->begin(), header->end(), column);
        if (it == header->end()) {
            throw FormatError("'" + path + "' has no column '" + column + "'");
        }
        value_col = static_cast<std::size_t>(it - header->begin());
    }
    const auto date_it = std::find(header->begin(), header->end(), "date");
    const bool keyed = date_it != header->end() && static_cast<std::size_t>(date_it - header->begin()) != value_col;
    const auto date_col = static_cast<std::size_t>(date_it - header->begin());
    std::map<std::string, double> values;
    std::size_t line = 1;
    while (auto row = csv::read_row(in)) {
        ++line;
        if (row->size() == 1 && row->front().empty()) continue;
        if (row->size() != header->size()) {
            throw FormatError("'" + path + "' line " + std::to_string(line) + ": column count mismatch");
        }
        const auto v = csv::parse_double((*row)[value_col]);
        if (!v || !std::isfinite(*v)) {
            throw FormatError("'" + path + "' line " + std::to_string(line) + ": non-numeric value");
        }
        char key[32];
        std::snprintf(key, sizeof key, "%012zu", line);
        values[keyed ? (*row)[date_col] : std::string(key)] = *v;
    }
    return values;
}

int cmd_eval(const EvalOpts& o, const Globals&, std::ostream& out, std::ostream& err) {
    const auto pred = read_value_column(o.pred, o.pred_column);
    const auto truth = read_value_column(o.truth, o.truth_column);
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& [key, v] : pred) {
        if (const auto it = truth.find(key); it != truth.end()) {
            a.push_back(v);
            b.push_back(it->second);
        }
    }
    if (a.size() < 2) {
        throw DegenerateDataError("fewer than two matching rows between '" + o.pred + "' and '" + o.truth + "'");
    }
    if (a.size() < pred.size() || a.size() < truth.size()) {
        err << "warning: evaluated " << a.size() << " matching rows (" << pred.size() << " predictions, "
            << truth.size() << " truth rows)\n";
    }
    const auto rho = stats::spearman(a, b);
    if (!rho) {
        err << "error: spearman undefined: one input is fully tied\n";
        out << "undefined\n";
        return kDegenerate;
    }
    out << format_rho(rho) << '\n';
    return kOk;
}

struct TransferOpts {
    std::string source_features;
    CaseInput source_cases;
    std::string target_features;
    CaseInput target_cases;
    std::string setting;
    std::string case_mode = "total";
    std::string svr;
    std::string label;
    std::string out;
};

int cmd_transfer(const TransferOpts& o, const Globals& g, std::ostream& out, std::ostream& err) {
    experiment::ExperimentConfig cfg;
    cfg.time_setting = parse_setting(o.setting);
    cfg.case_mode = corpus::parse_case_mode(o.case_mode);
    cfg.svr_params = load_svr(o.svr, g.seed);
    cfg.label = o.label;

    const features::FeatureTable source = load_features(o.source_features);
    const features::FeatureTable target = load_features(o.target_features);
    const corpus::CaseSeries source_cases = load_cases(o.source_cases, err);
    const corpus::CaseSeries target_cases = load_cases(o.target_cases, err);
    cfg.source_country = !o.source_cases.country.empty() ? o.source_cases.country
                         : !source_cases.country.empty() ? source_cases.country
                                                         : "source";
    cfg.target_country = !o.target_cases.country.empty() ? o.target_cases.country
                         : !target_cases.country.empty() ? target_cases.country
                                                         : "target";

    const experiment::ExperimentResult result =
        experiment::run_on_features(cfg, source, source_cases, target, target_cases);
    for (const std::string& w : result.warnings) {
        err << "warning: " << w << '\n';
    }
    std::vector<fs::path> inputs{o.source_features, o.source_cases.path, o.target_features, o.target_cases.path};
    if (!o.svr.empty()) inputs.emplace_back(o.svr);
    if (!o.out.empty()) {
        std::ostringstream doc;
        experiment::write_result_json(result, doc);
        write_file(o.out, doc.str());
        write_manifest({"transfer",
                        {{"setting", o.setting}, {"case_mode", o.case_mode}, {"svr", to_json(cfg.svr_params)},
                         {"label", o.label}, {"source_country", cfg.source_country},
                         {"target_country", cfg.target_country}},
                        inputs,
                        {o.out},
                        {{"seed", g.seed}}},
                       o.out);
    }
    out << format_rho(result.spearman) << '\n';
    return kOk;
}

struct ReportOpts {
    std::string results_dir;
    std::string out;
};

int cmd_report(const ReportOpts& o, const Globals&, std::ostream& out, std::ostream&) {
    const fs::path dir(o.results_dir);
    if (!fs::is_directory(dir)) {
        throw IoError("results directory '" + o.results_dir + "' does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    report::ReportInputs inputs;
    std::vector<fs::path> used;
    for (const fs::path& p : files) {
        const std::string name = p.filename().string();
        if (name.ends_with(".manifest.json")) continue;
        if (p.extension() == ".json") {
            auto in = open_input(p);
            const json doc = json::parse(in, nullptr, false);
            if (doc.is_discarded() || !doc.is_object()) continue;
            const std::string kind = doc.value("kind", "");
            in.clear();
            in.seekg(0);
            if (kind == "experiment_result") {
                inputs.results.push_back(experiment::read_result_json(in));
                used.push_back(p);
            } else if (kind == "filter_stats") {
                try {
                    inputs.filter_stats.push_back(
                        {doc.value("country", p.stem().string()), filter_stats_from_json(doc)});
                } catch (const json::exception& e) {
                    throw FormatError("'" + p.string() + "': " + e.what());
                }
                used.push_back(p);
            }
        } else if (p.extension() == ".csv") {
            auto in = open_input(p);
            const auto header = csv::read_row(in);
            if (!header || header->size() < 2 || (*header)[0] != "date" || (*header)[1] != "tweet_count") continue;
            in.clear();
            in.seekg(0);
            const features::FeatureTable table = features::read_feature_csv(in);
            report::CountryFrequency freq;
            freq.country = name.substr(0, name.find('.'));
            for (const auto& row : table.rows) freq.counts[row.date] = row.tweet_count;
            inputs.frequencies.push_back(std::move(freq));
            used.push_back(p);
        }
    }
    if (inputs.results.empty()) {
        throw DegenerateDataError("no experiment results found in '" + o.results_dir + "'");
    }
    const std::vector<report::ReportFile> report_files = report::emit_report(inputs);
    const fs::path out_dir(o.out);
    std::vector<fs::path> outputs;
    for (const report::ReportFile& f : report_files) {
        write_file(out_dir / f.name, f.content);
        outputs.push_back(out_dir / f.name);
    }
    write_manifest({"report", {{"results_dir", o.results_dir}}, used, outputs}, out_dir / "report");
    out << "wrote " << report_files.size() << " report file(s) to " << o.out << '\n';
    return kOk;
}

void add_case_options(CLI::App* app, CaseInput& cases, const std::string& prefix, bool required) {
    const std::string flag = prefix.empty() ? "--cases" : "--" + prefix + "-cases";
    auto* opt = app->add_option(flag, cases.path, "case-count CSV");
    if (required) opt->required();
    const std::string fmt = prefix.empty() ? "--case-format" : "--" + prefix + "-case-format";
    app->add_option(fmt, cases.format, "long (date,country,total_cases) or jhu (CSSE wide)")
        ->check(CLI::IsMember({"long", "jhu"}));
    const std::string country = prefix.empty() ? "--country" : "--" + prefix + "-country";
    app->add_option(country, cases.country, "country name (required for jhu; overrides the CSV's country)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"epialign: align tweet activity with reported case counts", "epialign"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Globals g;
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--seed", g.seed, "seed recorded in models and manifests")->capture_default_str();

    FilterOpts filter;
    auto* filter_cmd = app.add_subcommand("filter", "apply the tweet filter chain");
    filter_cmd->add_option("input", filter.input, "tweets JSONL")->required();
    filter_cmd->add_option("--config", filter.config, "filter config JSON")->required();
    filter_cmd->add_option("--out", filter.out, "filtered JSONL")->required();
    filter_cmd->add_option("--stats", filter.stats, "filter statistics JSON");

    FeaturizeOpts featurize;
    auto* featurize_cmd = app.add_subcommand("featurize", "build per-day feature vectors");
    featurize_cmd->add_option("input", featurize.input, "filtered tweets JSONL")->required();
    featurize_cmd->add_option("--features", featurize.features, "feature config JSON")->required();
    featurize_cmd->add_option("--emb", featurize.emb, "EMB1 embedding store");
    featurize_cmd->add_option("--mock-dim", featurize.mock_dim, "use hashed trigram mock embeddings of this size");
    featurize_cmd->add_option("--range", featurize.range, "FIRST:LAST date range")->capture_default_str();
    featurize_cmd->add_option("--out", featurize.out, "feature CSV")->required();

    TrainOpts train;
    auto* train_cmd = app.add_subcommand("train", "fit an SVR model on one country's features");
    train_cmd->add_option("--features", train.features, "feature CSV")->required();
    add_case_options(train_cmd, train.cases, "", true);
    train_cmd->add_option("--setting", train.setting, "time setting whose train period is used")
        ->capture_default_str();
    train_cmd->add_option("--range", train.range, "explicit FIRST:LAST train range (overrides --setting)");
    train_cmd->add_option("--case-mode", train.case_mode)->check(CLI::IsMember({"total", "new"}))->capture_default_str();
    train_cmd->add_option("--svr", train.svr, "SVR params JSON");
    train_cmd->add_option("--out", train.out, "model JSON")->required();

    PredictOpts predict;
    auto* predict_cmd = app.add_subcommand("predict", "predict daily cases from features");
    predict_cmd->add_option("--model", predict.model, "model JSON")->required();
    predict_cmd->add_option("--features", predict.features, "feature CSV")->required();
    predict_cmd->add_option("--range", predict.range, "FIRST:LAST date range");
    predict_cmd->add_option("--out", predict.out, "prediction CSV (stdout if omitted)");

    EvalOpts eval;
    auto* eval_cmd = app.add_subcommand("eval", "Spearman correlation between two CSV columns");
    eval_cmd->add_option("--pred", eval.pred, "prediction CSV")->required();
    eval_cmd->add_option("--truth", eval.truth, "truth CSV")->required();
    eval_cmd->add_option("--pred-column", eval.pred_column, "value column (default: last)");
    eval_cmd->add_option("--truth-column", eval.truth_column, "value column (default: last)");

    TransferOpts transfer;
    auto* transfer_cmd = app.add_subcommand("transfer", "train on a source country, evaluate on a target");
    transfer_cmd->add_option("--source-features", transfer.source_features)->required();
    add_case_options(transfer_cmd, transfer.source_cases, "source", true);
    transfer_cmd->add_option("--target-features", transfer.target_features)->required();
    add_case_options(transfer_cmd, transfer.target_cases, "target", true);
    transfer_cmd->add_option("--setting", transfer.setting, "time setting I..V")->required();
    transfer_cmd->add_option("--case-mode", transfer.case_mode)
        ->check(CLI::IsMember({"total", "new"}))
        ->capture_default_str();
    transfer_cmd->add_option("--svr", transfer.svr, "SVR params JSON");
    transfer_cmd->add_option("--label", transfer.label, "feature-variant label for reports (e.g. mBERT)");
    transfer_cmd->add_option("--out", transfer.out, "experiment result JSON");

    ReportOpts report_opts;
    auto* report_cmd = app.add_subcommand("report", "render result tables as CSV");
    report_cmd->add_option("results", report_opts.results_dir, "directory of result/stats/feature files")->required();
    report_cmd->add_option("--out", report_opts.out, "output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (filter_cmd->parsed()) return cmd_filter(filter, g, out, err);
        if (featurize_cmd->parsed()) return cmd_featurize(featurize, g, out, err);
        if (train_cmd->parsed()) return cmd_train(train, g, out, err);
        if (predict_cmd->parsed()) return cmd_predict(predict, g, out, err);
        if (eval_cmd->parsed()) return cmd_eval(eval, g, out, err);
        if (transfer_cmd->parsed()) return cmd_transfer(transfer, g, out, err);
        if (report_cmd->parsed()) return cmd_report(report_opts, g, out, err);
    } catch (const DegenerateDataError& e) {
        err << "error: " << e.what() << '\n';
        return kDegenerate;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}

}  // namespace epialign::cli
