#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "epialign/corpus.hpp"
#include "epialign/experiment.hpp"
#include "epialign/features.hpp"
#include "epialign/regress.hpp"

// JSON config readers. Relative file references inside a config resolve
// against `base_dir`. All readers throw FormatError on bad input.
namespace epialign::config {

/// {"language": "it", "country": "Italy",
///  "country_lexicon": [...] | "country_lexicon_file": "path",
///  "drop_retweets": true, "drop_hyperlinks": true, "drop_duplicates": true,
///  "utc_offset_minutes": 0}
struct FilterFile {
    corpus::FilterConfig filter;
    std::string country;
};
FilterFile read_filter_config(std::istream& in, const std::filesystem::path& base_dir);

/// {"use_tweet_frequency": true,
///  "keywords": {"language": "it", "keywords": [...]} | "keywords_file": "path",
///  "embedding": {"pooling": "average"|"max", "dim": 8},
///  "utc_offset_minutes": 0}
struct FeatureFile {
    features::FeatureConfig features;
    std::chrono::minutes utc_offset{0};
};
FeatureFile read_feature_config(std::istream& in, const std::filesystem::path& base_dir);

/// {"C": 1.0, "epsilon": 0.1, "tol": 1e-3, "max_passes": N, "seed": 0,
///  "kernel": {"kind": "rbf", "gamma": "scale"|number, "coef0": 0, "degree": 3}}
/// Missing keys keep their defaults.
regress::SvrParams read_svr_params(std::istream& in);

/// {"source_country", "target_country", "label", "case_mode": "total"|"new",
///  "setting": "I".."V" | {"train": ["a:b", ...], "test": [...]},
///  "features": {...feature config...} | "features_file": "path",
///  "svr": {...} | "svr_file": "path"}
experiment::ExperimentConfig read_experiment_config(std::istream& in, const std::filesystem::path& base_dir);

}  // namespace epialign::config
