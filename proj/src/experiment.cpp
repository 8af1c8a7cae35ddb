#include "epialign/experiment.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "epialign/error.hpp"
#include "epialign/stats.hpp"

namespace epialign::experiment {

using nlohmann::json;

std::string_view to_string(SettingName name) {
    switch (name) {
        case SettingName::I: return "I";
        case SettingName::II: return "II";
        case SettingName::III: return "III";
        case SettingName::IV: return "IV";
        case SettingName::V: return "V";
        case SettingName::custom: return "custom";
    }
    return "custom";
}

namespace {

SettingName parse_setting_name(std::string_view s) {
    for (SettingName n : {SettingName::I, SettingName::II, SettingName::III, SettingName::IV, SettingName::V,
                          SettingName::custom}) {
        if (to_string(n) == s) return n;
    }
    throw FormatError("unknown time setting '" + std::string(s) + "'");
}

bool in_any(std::span<const DateRange> ranges, Date d) {
    return std::any_of(ranges.begin(), ranges.end(), [d](const DateRange& r) { return r.contains(d); });
}

std::vector<Date> union_days(std::span<const DateRange> ranges) {
    std::set<Date> days;
    for (const DateRange& r : ranges) {
        for (Date d : r.days()) days.insert(d);
    }
    return {days.begin(), days.end()};
}

Date ymd(int y, unsigned m, unsigned d) {
    return std::chrono::sys_days{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

}  // namespace

void TimeSetting::validate() const {
    if (train.empty() || test.empty()) {
        throw ContractError("time setting needs at least one train and one test interval");
    }
}

bool TimeSetting::in_train(Date d) const { return in_any(train, d); }
bool TimeSetting::in_test(Date d) const { return in_any(test, d); }

bool TimeSetting::overlapping() const {
    for (Date d : train_days()) {
        if (in_test(d)) return true;
    }
    return false;
}

std::vector<Date> TimeSetting::train_days() const { return union_days(train); }
std::vector<Date> TimeSetting::test_days() const { return union_days(test); }

TimeSetting split_preset(std::string_view name) {
    const DateRange feb{ymd(2020, 2, 1), ymd(2020, 2, 29)};
    const DateRange mar{ymd(2020, 3, 1), ymd(2020, 3, 31)};
    const DateRange apr{ymd(2020, 4, 1), ymd(2020, 4, 30)};
    const DateRange feb_mar{feb.first, mar.last};
    const DateRange mar_apr{mar.first, apr.last};
    const DateRange all{feb.first, apr.last};
    if (name == "I") return {SettingName::I, {feb_mar}, {apr}};
    if (name == "II") return {SettingName::II, {feb}, {mar_apr}};
    if (name == "III") return {SettingName::III, {feb}, {mar}};
    if (name == "IV") return {SettingName::IV, {mar}, {apr}};
    if (name == "V") return {SettingName::V, {all}, {all}};
    throw FormatError("unknown time setting '" + std::string(name) + "'; valid settings are I, II, III, IV, V");
}

namespace {

struct Aligned {
    regress::Matrix X;
    std::vector<double> y;
    std::vector<Date> dates;
    std::size_t missing_features = 0;
    std::size_t missing_cases = 0;
    std::size_t empty_days = 0;
};

Aligned align(const std::vector<Date>& days, const features::FeatureTable& table, const corpus::CaseSeries& cases) {
    Aligned a;
    a.X = regress::Matrix(0, table.dimension());
    for (Date d : days) {
        const features::DayFeatures* row = table.find(d);
        const auto y = cases.on(d);
        if (row == nullptr) ++a.missing_features;
        if (!y) ++a.missing_cases;
        if (row == nullptr || !y) continue;
        if (row->empty_embedding) ++a.empty_days;
        a.X.append_row(row->x);
        a.y.push_back(static_cast<double>(*y));
        a.dates.push_back(d);
    }
    return a;
}

void report_drops(const Aligned& a, std::size_t requested, const std::string& split, const std::string& country,
                  std::vector<std::string>& warnings) {
    const std::size_t dropped = requested - a.dates.size();
    if (dropped > 0) {
        warnings.push_back(split + ": dropped " + std::to_string(dropped) + " of " + std::to_string(requested) +
                           " days for " + country + " (" + std::to_string(a.missing_features) +
                           " without features, " + std::to_string(a.missing_cases) + " without case counts)");
    }
    if (a.empty_days > 0) {
        warnings.push_back(split + ": " + std::to_string(a.empty_days) + " days for " + country +
                           " have no embeddable tweets (zero embedding block)");
    }
}

corpus::CaseSeries targets_for(const corpus::CaseSeries& cases, corpus::CaseMode mode) {
    if (cases.mode != corpus::CaseMode::total) {
        throw ContractError("run_on_features expects total-mode case series");
    }
    return mode == corpus::CaseMode::total ? cases : corpus::derive_new_cases(cases);
}

}  // namespace

ExperimentResult run_on_features(const ExperimentConfig& cfg, const features::FeatureTable& source_features,
                                 const corpus::CaseSeries& source_cases,
                                 const features::FeatureTable& target_features,
                                 const corpus::CaseSeries& target_cases) {
    cfg.time_setting.validate();
    if (source_features.names != target_features.names) {
        throw FormatError("source and target feature columns differ; transfer needs identical feature configs");
    }
    ExperimentResult result;
    result.source_country = cfg.source_country;
    result.target_country = cfg.target_country;
    result.label = cfg.label;
    result.setting = cfg.time_setting.name;
    result.case_mode = cfg.case_mode;
    result.upper_bound = cfg.time_setting.overlapping();
    if (result.upper_bound) {
        result.warnings.push_back("train and test periods overlap; correlation is an upper bound");
    }

    const corpus::CaseSeries source_y = targets_for(source_cases, cfg.case_mode);
    const corpus::CaseSeries target_y = targets_for(target_cases, cfg.case_mode);

    const std::vector<Date> train_days = cfg.time_setting.train_days();
    const std::vector<Date> test_days = cfg.time_setting.test_days();
    const Aligned train = align(train_days, source_features, source_y);
    const Aligned test = align(test_days, target_features, target_y);
    report_drops(train, train_days.size(), "train", cfg.source_country, result.warnings);
    report_drops(test, test_days.size(), "test", cfg.target_country, result.warnings);

    const std::set<double> distinct_train(train.y.begin(), train.y.end());
    if (distinct_train.size() < 2) {
        throw DegenerateDataError("training targets for " + cfg.source_country +
                                  " have fewer than two distinct values; choose a different setting");
    }
    if (test.dates.size() < 2) {
        throw DegenerateDataError("fewer than two test days remain for " + cfg.target_country +
                                  " after aligning features and case counts");
    }

    const regress::SvrModel model = regress::svr_fit(train.X, train.y, cfg.svr_params);
    result.converged = model.converged;
    if (!model.converged) {
        result.warnings.push_back("SVR solver hit the pair-update cap before reaching tol");
    }
    result.n_train = train.dates.size();
    result.n_test = test.dates.size();

    std::vector<double> predicted(test.dates.size());
    for (std::size_t i = 0; i < test.dates.size(); ++i) {
        predicted[i] = regress::svr_predict(model, test.X.row(i));
        result.predictions.push_back({test.dates[i], predicted[i], test.y[i]});
    }
    result.spearman = stats::spearman(predicted, test.y);
    if (!result.spearman) {
        result.warnings.push_back("spearman undefined: predictions or test targets are all tied");
    }
    const std::set<double> distinct_test(test.y.begin(), test.y.end());
    if (distinct_test.size() < test.y.size()) {
        result.warnings.push_back("test targets contain ties (" + std::to_string(distinct_test.size()) +
                                  " distinct of " + std::to_string(test.y.size()) + "); average ranks used");
    }
    return result;
}

namespace {

DateRange span_of(std::span<const DateRange> ranges) {
    Date lo = ranges.front().first;
    Date hi = ranges.front().last;
    for (const DateRange& r : ranges) {
        lo = std::min(lo, r.first);
        hi = std::max(hi, r.last);
    }
    return {lo, hi};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const CountryData& source, const CountryData& target,
                                const features::EmbeddingProvider* provider, unsigned threads) {
    cfg.time_setting.validate();
    const features::FeatureTable source_table = features::build_feature_table(
        cfg.feature_config, source.tweets, span_of(cfg.time_setting.train), provider, threads);
    const features::FeatureTable target_table = features::build_feature_table(
        cfg.feature_config, target.tweets, span_of(cfg.time_setting.test), provider, threads);
    return run_on_features(cfg, source_table, source.cases, target_table, target.cases);
}

// ---------------------------------------------------------------------------

void write_result_json(const ExperimentResult& r, std::ostream& out) {
    json preds = json::array();
    for (const PredictionRow& p : r.predictions) {
        preds.push_back({{"date", format_date(p.date)}, {"predicted", p.predicted}, {"actual", p.actual}});
    }
    const json doc = {
        {"kind", "experiment_result"},
        {"version", 1},
        {"source_country", r.source_country},
        {"target_country", r.target_country},
        {"label", r.label},
        {"setting", std::string(to_string(r.setting))},
        {"case_mode", std::string(corpus::to_string(r.case_mode))},
        {"spearman", r.spearman ? json(*r.spearman) : json(nullptr)},
        {"spearman_status", r.spearman ? "ok" : "undefined"},
        {"n_train", r.n_train},
        {"n_test", r.n_test},
        {"upper_bound", r.upper_bound},
        {"converged", r.converged},
        {"predictions", preds},
        {"warnings", r.warnings},
    };
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing result JSON");
    }
}

ExperimentResult read_result_json(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("result JSON: parse error: ") + e.what());
    }
    try {
        if (doc.at("kind") != "experiment_result") {
            throw FormatError("result JSON: kind is not experiment_result");
        }
        ExperimentResult r;
        r.source_country = doc.at("source_country").get<std::string>();
        r.target_country = doc.at("target_country").get<std::string>();
        r.label = doc.value("label", "");
        r.setting = parse_setting_name(doc.at("setting").get<std::string>());
        r.case_mode = corpus::parse_case_mode(doc.at("case_mode").get<std::string>());
        if (!doc.at("spearman").is_null()) {
            r.spearman = doc.at("spearman").get<double>();
        }
        r.n_train = doc.at("n_train").get<std::size_t>();
        r.n_test = doc.at("n_test").get<std::size_t>();
        r.upper_bound = doc.value("upper_bound", false);
        r.converged = doc.value("converged", true);
        for (const json& p : doc.value("predictions", json::array())) {
            r.predictions.push_back(
                {parse_date(p.at("date").get<std::string>()), p.at("predicted").get<double>(), p.at("actual").get<double>()});
        }
        r.warnings = doc.value("warnings", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("result JSON: ") + e.what());
    }
}

}  // namespace epialign::experiment
