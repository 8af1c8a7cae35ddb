#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "epialign/corpus.hpp"
#include "epialign/date.hpp"
#include "epialign/embedding_store.hpp"

namespace epialign::features {

using corpus::Tweet;

enum class MatchMode : std::uint8_t { substring_casefold };

struct KeywordSpec {
    std::vector<std::string> keywords;
    MatchMode match_mode = MatchMode::substring_casefold;
    std::string language;

    /// Throws ContractError on an empty list, a blank keyword or two keywords
    /// equal after case folding.
    void validate() const;
};

/// `{"language": "it", "keywords": ["lockdown", ...]}`
KeywordSpec parse_keyword_spec(std::istream& in);

enum class Pooling : std::uint8_t { average, max };

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view name);

struct EmbeddingFeature {
    Pooling pooling = Pooling::average;
    /// Expected dimension; 0 means "take it from the provider".
    std::size_t dim = 0;
};

/// Features are concatenated in the fixed order
/// [tweet frequency] ++ [keyword counts in spec order] ++ [pooled embedding].
struct FeatureConfig {
    bool use_tweet_frequency = true;
    std::optional<KeywordSpec> keywords;
    std::optional<EmbeddingFeature> embedding;

    void validate() const;
    std::size_t dimension(std::size_t embedding_dim) const;
};

/// Column names: `freq`, `kw:<keyword>`, `emb:<i>`.
std::vector<std::string> feature_names(const FeatureConfig& cfg, std::size_t embedding_dim);

/// Source of per-tweet vectors used for the micro features.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dim() const = 0;
    /// Writes the tweet's vector into `out` (size dim()); false if unavailable.
    virtual bool embed(const Tweet& tweet, std::span<double> out) const = 0;
};

class StoreProvider final : public EmbeddingProvider {
public:
    explicit StoreProvider(const EmbeddingStore& store) : store_(store) {}
    std::size_t dim() const override { return store_.dim(); }
    bool embed(const Tweet& tweet, std::span<double> out) const override;

private:
    const EmbeddingStore& store_;
};

/// Test stand-in for a sentence encoder: see mock_embed.
class MockProvider final : public EmbeddingProvider {
public:
    explicit MockProvider(std::size_t dim);
    std::size_t dim() const override { return dim_; }
    bool embed(const Tweet& tweet, std::span<double> out) const override;

private:
    std::size_t dim_;
};

/// Deterministic hashed character-trigram embedding of the NFC text, with
/// signed bucket counts, L2-normalized. Empty text maps to the zero vector.
std::vector<double> mock_embed(std::string_view text, std::size_t dim);

/// Number of tweets per calendar day, zero-filled over `range`.
std::map<Date, std::size_t> daily_tweet_frequency(std::span<const Tweet> tweets, const DateRange& range,
                                                  std::chrono::minutes utc_offset = std::chrono::minutes{0});

/// Per day, for each keyword: number of tweets whose folded text contains it.
std::map<Date, std::vector<std::size_t>> daily_keyword_counts(std::span<const Tweet> tweets, const KeywordSpec& spec,
                                                              const DateRange& range,
                                                              std::chrono::minutes utc_offset = std::chrono::minutes{0});

/// Component-wise mean or max. Throws ContractError on an empty input or
/// mismatched dimensions.
std::vector<double> pool_embeddings(std::span<const std::vector<double>> vectors, Pooling mode);

struct DayFeatures {
    Date date{};
    std::vector<double> x;
    std::size_t tweet_count = 0;
    /// No tweet of the day had an embedding; the embedding block is zero.
    bool empty_embedding = false;
    std::size_t missing_embeddings = 0;

    friend bool operator==(const DayFeatures&, const DayFeatures&) = default;
};

/// Builds one day's vector. `provider` may be null only when the config has
/// no embedding block.
DayFeatures assemble_day_features(const FeatureConfig& cfg, std::span<const Tweet> day_tweets,
                                  const EmbeddingProvider* provider, Date date);

struct FeatureTable {
    std::vector<std::string> names;
    std::vector<DayFeatures> rows;  // sorted by date, unique dates

    std::size_t dimension() const { return names.size(); }
    const DayFeatures* find(Date d) const;
    std::size_t missing_embeddings() const;
};

/// One row per day of `range`; tweets outside the range are ignored.
/// Days are featurized on up to `threads` workers; output is independent of
/// the worker count.
FeatureTable build_feature_table(const FeatureConfig& cfg, std::span<const Tweet> tweets, const DateRange& range,
                                 const EmbeddingProvider* provider, unsigned threads = 1,
                                 std::chrono::minutes utc_offset = std::chrono::minutes{0});

/// CSV: `date,tweet_count,empty_day,<feature names...>`.
void write_feature_csv(const FeatureTable& table, std::ostream& out);
FeatureTable read_feature_csv(std::istream& in);

}  // namespace epialign::features
