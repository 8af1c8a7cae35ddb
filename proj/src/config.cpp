#include "epialign/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epialign/error.hpp"

namespace epialign::config {

using nlohmann::json;

namespace {

json parse(std::istream& in, const std::string& what) {
    try {
        json doc = json::parse(in);
        if (!doc.is_object()) {
            throw FormatError(what + ": top level must be a JSON object");
        }
        return doc;
    } catch (const json::exception& e) {
        throw FormatError(what + ": invalid JSON: " + e.what());
    }
}

std::ifstream open(const std::filesystem::path& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(what + ": cannot open '" + path.string() + "'");
    }
    return in;
}

template <typename T>
T get(const json& obj, const char* key, const T& fallback, const std::string& what) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw FormatError(what + ": field '" + key + "' has the wrong type");
    }
}

std::chrono::minutes utc_offset(const json& doc, const std::string& what) {
    const int minutes = get<int>(doc, "utc_offset_minutes", 0, what);
    if (minutes < -24 * 60 || minutes > 24 * 60) {
        throw FormatError(what + ": utc_offset_minutes out of range");
    }
    return std::chrono::minutes{minutes};
}

features::FeatureConfig feature_config_from(const json& doc, const std::filesystem::path& base_dir,
                                            const std::string& what) {
    features::FeatureConfig cfg;
    cfg.use_tweet_frequency = get<bool>(doc, "use_tweet_frequency", true, what);
    if (doc.contains("keywords") && doc.contains("keywords_file")) {
        throw FormatError(what + ": give either 'keywords' or 'keywords_file', not both");
    }
    if (const auto it = doc.find("keywords"); it != doc.end() && !it->is_null()) {
        std::istringstream in(it->dump());
        cfg.keywords = features::parse_keyword_spec(in);
    } else if (doc.contains("keywords_file")) {
        auto in = open(base_dir / get<std::string>(doc, "keywords_file", "", what), what);
        cfg.keywords = features::parse_keyword_spec(in);
    }
    if (const auto it = doc.find("embedding"); it != doc.end() && !it->is_null()) {
        if (!it->is_object()) {
            throw FormatError(what + ": 'embedding' must be an object");
        }
        features::EmbeddingFeature emb;
        emb.pooling = features::parse_pooling(get<std::string>(*it, "pooling", "average", what));
        const int dim = get<int>(*it, "dim", 0, what);
        if (dim < 0) {
            throw FormatError(what + ": embedding dim must be nonnegative");
        }
        emb.dim = static_cast<std::size_t>(dim);
        cfg.embedding = emb;
    }
    try {
        cfg.validate();
    } catch (const ContractError& e) {
        throw FormatError(what + ": " + e.what());
    }
    return cfg;
}

regress::SvrParams svr_params_from(const json& doc, const std::string& what) {
    regress::SvrParams p;
    p.C = get<double>(doc, "C", p.C, what);
    p.epsilon = get<double>(doc, "epsilon", p.epsilon, what);
    p.tol = get<double>(doc, "tol", p.tol, what);
    if (doc.contains("max_passes") && !doc["max_passes"].is_null()) {
        p.max_passes = get<std::size_t>(doc, "max_passes", 0, what);
    }
    p.seed = get<std::uint64_t>(doc, "seed", 0, what);
    if (const auto it = doc.find("kernel"); it != doc.end()) {
        if (it->is_string()) {
            p.kernel.kind = regress::parse_kernel_kind(it->get<std::string>());
        } else if (it->is_object()) {
            p.kernel.kind = regress::parse_kernel_kind(get<std::string>(*it, "kind", "rbf", what));
            if (const auto g = it->find("gamma"); g != it->end() && !g->is_null()) {
                if (g->is_number()) {
                    p.kernel.gamma = g->get<double>();
                } else if (!(g->is_string() && g->get<std::string>() == "scale")) {
                    throw FormatError(what + ": kernel gamma must be a number or \"scale\"");
                }
            }
            p.kernel.coef0 = get<double>(*it, "coef0", 0.0, what);
            p.kernel.degree = get<int>(*it, "degree", 3, what);
        } else {
            throw FormatError(what + ": 'kernel' must be a name or an object");
        }
    }
    try {
        p.validate();
    } catch (const ContractError& e) {
        throw FormatError(what + ": " + e.what());
    }
    return p;
}

std::vector<DateRange> ranges_from(const json& arr, const std::string& what) {
    if (!arr.is_array() || arr.empty()) {
        throw FormatError(what + ": custom setting intervals must be a nonempty array");
    }
    std::vector<DateRange> out;
    for (const json& r : arr) {
        if (!r.is_string()) {
            throw FormatError(what + ": intervals are strings like 2020-02-01:2020-02-29");
        }
        out.push_back(parse_date_range(r.get<std::string>()));
    }
    return out;
}

}  // namespace

FilterFile read_filter_config(std::istream& in, const std::filesystem::path& base_dir) {
    const std::string what = "filter config";
    const json doc = parse(in, what);
    FilterFile out;
    out.filter.language = get<std::string>(doc, "language", "", what);
    out.country = get<std::string>(doc, "country", "", what);
    out.filter.drop_retweets = get<bool>(doc, "drop_retweets", true, what);
    out.filter.drop_hyperlinks = get<bool>(doc, "drop_hyperlinks", true, what);
    out.filter.drop_duplicates = get<bool>(doc, "drop_duplicates", true, what);
    out.filter.country_lexicon = get<std::vector<std::string>>(doc, "country_lexicon", {}, what);
    if (doc.contains("country_lexicon_file")) {
        auto lex = open(base_dir / get<std::string>(doc, "country_lexicon_file", "", what), what);
        for (std::string& entry : corpus::read_lexicon(lex)) {
            out.filter.country_lexicon.push_back(std::move(entry));
        }
    }
    try {
        out.filter.validate();
    } catch (const ContractError& e) {
        throw FormatError(what + ": " + e.what());
    }
    return out;
}

FeatureFile read_feature_config(std::istream& in, const std::filesystem::path& base_dir) {
    const std::string what = "feature config";
    const json doc = parse(in, what);
    return {feature_config_from(doc, base_dir, what), utc_offset(doc, what)};
}

regress::SvrParams read_svr_params(std::istream& in) {
    const std::string what = "SVR params";
    return svr_params_from(parse(in, what), what);
}

experiment::ExperimentConfig read_experiment_config(std::istream& in, const std::filesystem::path& base_dir) {
    const std::string what = "experiment config";
    const json doc = parse(in, what);
    experiment::ExperimentConfig cfg;
    cfg.source_country = get<std::string>(doc, "source_country", "", what);
    cfg.target_country = get<std::string>(doc, "target_country", cfg.source_country, what);
    if (cfg.source_country.empty()) {
        throw FormatError(what + ": source_country is required");
    }
    cfg.label = get<std::string>(doc, "label", "", what);
    cfg.case_mode = corpus::parse_case_mode(get<std::string>(doc, "case_mode", "total", what));

    const auto setting = doc.find("setting");
    if (setting == doc.end()) {
        throw FormatError(what + ": setting is required");
    }
    if (setting->is_string()) {
        cfg.time_setting = experiment::split_preset(setting->get<std::string>());
    } else if (setting->is_object()) {
        cfg.time_setting.name = experiment::SettingName::custom;
        cfg.time_setting.train = ranges_from(setting->value("train", json()), what);
        cfg.time_setting.test = ranges_from(setting->value("test", json()), what);
    } else {
        throw FormatError(what + ": setting must be a preset name or {train, test}");
    }

    if (doc.contains("features")) {
        cfg.feature_config = feature_config_from(doc["features"], base_dir, what);
    } else if (doc.contains("features_file")) {
        auto f = open(base_dir / get<std::string>(doc, "features_file", "", what), what);
        cfg.feature_config = feature_config_from(parse(f, what), base_dir, what);
    } else {
        throw FormatError(what + ": features or features_file is required");
    }

    if (doc.contains("svr")) {
        cfg.svr_params = svr_params_from(doc["svr"], what);
    } else if (doc.contains("svr_file")) {
        auto f = open(base_dir / get<std::string>(doc, "svr_file", "", what), what);
        cfg.svr_params = svr_params_from(parse(f, what), what);
    }
    return cfg;
}

}  // namespace epialign::config
