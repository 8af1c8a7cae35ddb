#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epialign/corpus.hpp"
#include "epialign/date.hpp"
#include "epialign/features.hpp"
#include "epialign/regress.hpp"

namespace epialign::experiment {

enum class SettingName : std::uint8_t { I, II, III, IV, V, custom };

std::string_view to_string(SettingName name);

struct TimeSetting {
    SettingName name = SettingName::custom;
    std::vector<DateRange> train;
    std::vector<DateRange> test;

    /// Throws ContractError on an empty train or test interval list.
    void validate() const;
    bool in_train(Date d) const;
    bool in_test(Date d) const;
    /// Train and test share at least one day (setting V style upper bound).
    bool overlapping() const;
    std::vector<Date> train_days() const;
    std::vector<Date> test_days() const;
};

/// Month-level Feb-Apr 2020 cuts:
///   I   train Feb+Mar, test Apr        II  train Feb, test Mar+Apr
///   III train Feb, test Mar            IV  train Mar, test Apr
///   V   train and test Feb+Mar+Apr
/// Throws FormatError listing the valid names for anything else.
TimeSetting split_preset(std::string_view name);

struct ExperimentConfig {
    std::string source_country;
    std::string target_country;
    /// Free-form tag for the feature variant (e.g. "mBERT", "LASER").
    std::string label;
    corpus::CaseMode case_mode = corpus::CaseMode::total;
    features::FeatureConfig feature_config;
    regress::SvrParams svr_params;
    TimeSetting time_setting;

    bool domestic() const { return source_country == target_country; }
};

struct PredictionRow {
    Date date{};
    double predicted = 0.0;
    double actual = 0.0;

    friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

struct ExperimentResult {
    std::string source_country;
    std::string target_country;
    std::string label;
    SettingName setting = SettingName::custom;
    corpus::CaseMode case_mode = corpus::CaseMode::total;
    /// nullopt when the correlation is undefined (fully tied vector).
    std::optional<double> spearman;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    bool upper_bound = false;
    bool converged = true;
    std::vector<PredictionRow> predictions;
    std::vector<std::string> warnings;

    bool domestic() const { return source_country == target_country; }
};

/// Fits on the source rows of the train days and evaluates on the target rows
/// of the test days. Days missing from a feature table or a case series are
/// dropped and reported. Case series must be in total mode; new-case targets
/// are derived here when requested.
/// Throws FormatError when the two feature tables have different columns and
/// DegenerateDataError when training targets are all equal or fewer than two
/// test days remain.
ExperimentResult run_on_features(const ExperimentConfig& cfg, const features::FeatureTable& source_features,
                                 const corpus::CaseSeries& source_cases,
                                 const features::FeatureTable& target_features,
                                 const corpus::CaseSeries& target_cases);

struct CountryData {
    std::span<const corpus::Tweet> tweets;
    corpus::CaseSeries cases;
};

/// Featurizes both corpora with the same FeatureConfig and provider, then
/// delegates to run_on_features.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const CountryData& source, const CountryData& target,
                                const features::EmbeddingProvider* provider, unsigned threads = 1);

void write_result_json(const ExperimentResult& result, std::ostream& out);
ExperimentResult read_result_json(std::istream& in);

}  // namespace epialign::experiment
