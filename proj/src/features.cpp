#include "epialign/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include <json.hpp>

#include "epialign/csv.hpp"
#include "epialign/error.hpp"
#include "epialign/text.hpp"

namespace epialign::features {

void KeywordSpec::validate() const {
    if (keywords.empty()) {
        throw ContractError("keyword list is empty");
    }
    std::set<std::string> folded;
    for (const std::string& k : keywords) {
        const std::string key = text::casefold(text::trim(k));
        if (key.empty()) {
            throw ContractError("blank keyword in keyword list");
        }
        if (!folded.insert(key).second) {
            throw ContractError("keyword '" + k + "' repeats after case folding");
        }
    }
}

KeywordSpec parse_keyword_spec(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("keyword config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("keywords") || !doc["keywords"].is_array()) {
        throw FormatError("keyword config needs a \"keywords\" array");
    }
    KeywordSpec spec;
    for (const auto& k : doc["keywords"]) {
        if (!k.is_string()) {
            throw FormatError("keyword entries must be strings");
        }
        spec.keywords.push_back(k.get<std::string>());
    }
    if (doc.contains("language")) {
        if (!doc["language"].is_string()) {
            throw FormatError("keyword config \"language\" must be a string");
        }
        spec.language = doc["language"].get<std::string>();
    }
    try {
        spec.validate();
    } catch (const ContractError& e) {
        throw FormatError(std::string("keyword config: ") + e.what());
    }
    return spec;
}

std::string_view to_string(Pooling p) {
    return p == Pooling::average ? "average" : "max";
}

Pooling parse_pooling(std::string_view name) {
    if (name == "average" || name == "avg" || name == "mean") {
        return Pooling::average;
    }
    if (name == "max") {
        return Pooling::max;
    }
    throw FormatError("unknown pooling '" + std::string(name) + "' (expected average or max)");
}

void FeatureConfig::validate() const {
    if (!use_tweet_frequency && !keywords && !embedding) {
        throw ContractError("feature config enables no feature source");
    }
    if (keywords) {
        keywords->validate();
    }
}

std::size_t FeatureConfig::dimension(std::size_t embedding_dim) const {
    return (use_tweet_frequency ? 1 : 0) + (keywords ? keywords->keywords.size() : 0) +
           (embedding ? embedding_dim : 0);
}

std::vector<std::string> feature_names(const FeatureConfig& cfg, std::size_t embedding_dim) {
    std::vector<std::string> names;
    if (cfg.use_tweet_frequency) {
        names.emplace_back("freq");
    }
    if (cfg.keywords) {
        for (const std::string& k : cfg.keywords->keywords) {
            names.push_back("kw:" + k);
        }
    }
    if (cfg.embedding) {
        for (std::size_t i = 0; i < embedding_dim; ++i) {
            names.push_back("emb:" + std::to_string(i));
        }
    }
    return names;
}

bool StoreProvider::embed(const Tweet& tweet, std::span<double> out) const {
    const auto vec = store_.find(tweet.id);
    if (!vec) {
        return false;
    }
    std::copy(vec->begin(), vec->end(), out.begin());
    return true;
}

MockProvider::MockProvider(std::size_t dim) : dim_(dim) {
    if (dim == 0) {
        throw ContractError("mock embedding dimension must be positive");
    }
}

bool MockProvider::embed(const Tweet& tweet, std::span<double> out) const {
    const std::vector<double> v = mock_embed(tweet.text, dim_);
    std::copy(v.begin(), v.end(), out.begin());
    return true;
}

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::vector<double> mock_embed(std::string_view input, std::size_t dim) {
    if (dim == 0) {
        throw ContractError("mock_embed: dim must be positive");
    }
    std::vector<double> v(dim, 0.0);
    const std::string normalized = text::nfc(input);
    if (normalized.empty()) {
        return v;
    }
    const auto cps = text::code_points(normalized);
    const auto add_gram = [&](std::string_view gram) {
        const std::uint64_t h = fnv1a(gram);
        const double sign = ((h >> 63) & 1U) != 0 ? -1.0 : 1.0;
        v[(h & 0x7FFFFFFFFFFFFFFFULL) % dim] += sign;
    };
    if (cps.size() < 3) {
        add_gram(normalized);
    } else {
        for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
            const char* begin = cps[i].data();
            const char* end = cps[i + 2].data() + cps[i + 2].size();
            add_gram(std::string_view(begin, static_cast<std::size_t>(end - begin)));
        }
    }
    double norm = 0.0;
    for (double c : v) {
        norm += c * c;
    }
    if (norm == 0.0) {
        // Signed counts cancelled out; fall back to a one-hot of the whole text.
        v[fnv1a(normalized) % dim] = 1.0;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& c : v) {
        c /= norm;
    }
    return v;
}

std::map<Date, std::size_t> daily_tweet_frequency(std::span<const Tweet> tweets, const DateRange& range,
                                                  std::chrono::minutes utc_offset) {
    std::map<Date, std::size_t> counts;
    for (Date d : range.days()) {
        counts.emplace(d, 0);
    }
    for (const Tweet& t : tweets) {
        const Date d = calendar_date(t.timestamp, utc_offset);
        if (range.contains(d)) {
            ++counts[d];
        }
    }
    return counts;
}

namespace {

std::vector<std::string> folded_keywords(const KeywordSpec& spec) {
    std::vector<std::string> out;
    out.reserve(spec.keywords.size());
    for (const std::string& k : spec.keywords) {
        out.push_back(text::casefold(text::trim(k)));
    }
    return out;
}

void count_keywords(std::string_view tweet_text, std::span<const std::string> folded, std::span<double> out) {
    const std::string haystack = text::casefold(tweet_text);
    for (std::size_t k = 0; k < folded.size(); ++k) {
        if (haystack.find(folded[k]) != std::string::npos) {
            out[k] += 1.0;
        }
    }
}

}  // namespace

std::map<Date, std::vector<std::size_t>> daily_keyword_counts(std::span<const Tweet> tweets, const KeywordSpec& spec,
                                                              const DateRange& range,
                                                              std::chrono::minutes utc_offset) {
    const std::vector<std::string> folded = folded_keywords(spec);
    std::map<Date, std::vector<std::size_t>> counts;
    for (Date d : range.days()) {
        counts.emplace(d, std::vector<std::size_t>(folded.size(), 0));
    }
    std::vector<double> hits(folded.size());
    for (const Tweet& t : tweets) {
        const Date d = calendar_date(t.timestamp, utc_offset);
        if (!range.contains(d)) {
            continue;
        }
        std::fill(hits.begin(), hits.end(), 0.0);
        count_keywords(t.text, folded, hits);
        auto& day = counts[d];
        for (std::size_t k = 0; k < hits.size(); ++k) {
            day[k] += hits[k] > 0 ? 1 : 0;
        }
    }
    return counts;
}

std::vector<double> pool_embeddings(std::span<const std::vector<double>> vectors, Pooling mode) {
    if (vectors.empty()) {
        throw ContractError("pool_embeddings: no vectors to pool");
    }
    const std::size_t dim = vectors.front().size();
    if (dim == 0) {
        throw ContractError("pool_embeddings: zero-dimensional vectors");
    }
    std::vector<double> out = vectors.front();
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        if (v.size() != dim) {
            throw ContractError("pool_embeddings: dimension mismatch");
        }
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = mode == Pooling::max ? std::max(out[j], v[j]) : out[j] + v[j];
        }
    }
    if (mode == Pooling::average) {
        const auto n = static_cast<double>(vectors.size());
        for (double& c : out) {
            c /= n;
        }
    }
    return out;
}

DayFeatures assemble_day_features(const FeatureConfig& cfg, std::span<const Tweet> day_tweets,
                                  const EmbeddingProvider* provider, Date date) {
    if (cfg.embedding && provider == nullptr) {
        throw ContractError("embedding features requested without an embedding provider");
    }
    const std::size_t emb_dim = cfg.embedding ? provider->dim() : 0;
    if (cfg.embedding && cfg.embedding->dim != 0 && cfg.embedding->dim != emb_dim) {
        throw ContractError("embedding dimension " + std::to_string(emb_dim) + " does not match configured " +
                            std::to_string(cfg.embedding->dim));
    }
    DayFeatures day;
    day.date = date;
    day.tweet_count = day_tweets.size();
    day.x.reserve(cfg.dimension(emb_dim));
    if (cfg.use_tweet_frequency) {
        day.x.push_back(static_cast<double>(day_tweets.size()));
    }
    if (cfg.keywords) {
        const std::vector<std::string> folded = folded_keywords(*cfg.keywords);
        std::vector<double> day_counts(folded.size(), 0.0);
        std::vector<double> hits(folded.size());
        for (const Tweet& t : day_tweets) {
            std::fill(hits.begin(), hits.end(), 0.0);
            count_keywords(t.text, folded, hits);
            for (std::size_t k = 0; k < hits.size(); ++k) {
                day_counts[k] += hits[k] > 0 ? 1.0 : 0.0;
            }
        }
        day.x.insert(day.x.end(), day_counts.begin(), day_counts.end());
    }
    if (cfg.embedding) {
        std::vector<std::vector<double>> vectors;
        vectors.reserve(day_tweets.size());
        std::vector<double> buf(emb_dim);
        for (const Tweet& t : day_tweets) {
            if (provider->embed(t, buf)) {
                vectors.push_back(buf);
            } else {
                ++day.missing_embeddings;
            }
        }
        if (vectors.empty()) {
            day.empty_embedding = true;
            day.x.insert(day.x.end(), emb_dim, 0.0);
        } else {
            const std::vector<double> pooled = pool_embeddings(vectors, cfg.embedding->pooling);
            day.x.insert(day.x.end(), pooled.begin(), pooled.end());
        }
    }
    return day;
}

const DayFeatures* FeatureTable::find(Date d) const {
    const auto it =
        std::lower_bound(rows.begin(), rows.end(), d, [](const DayFeatures& row, Date key) { return row.date < key; });
    return it != rows.end() && it->date == d ? &*it : nullptr;
}

std::size_t FeatureTable::missing_embeddings() const {
    std::size_t total = 0;
    for (const DayFeatures& r : rows) {
        total += r.missing_embeddings;
    }
    return total;
}

FeatureTable build_feature_table(const FeatureConfig& cfg, std::span<const Tweet> tweets, const DateRange& range,
                                 const EmbeddingProvider* provider, unsigned threads,
                                 std::chrono::minutes utc_offset) {
    cfg.validate();
    const std::size_t emb_dim = cfg.embedding && provider != nullptr ? provider->dim() : 0;
    const std::vector<Date> days = range.days();
    std::vector<std::vector<Tweet>> by_day(days.size());
    for (const Tweet& t : tweets) {
        const Date d = calendar_date(t.timestamp, utc_offset);
        if (range.contains(d)) {
            by_day[static_cast<std::size_t>((d - range.first).count())].push_back(t);
        }
    }

    FeatureTable table;
    table.names = feature_names(cfg, emb_dim);
    table.rows.resize(days.size());
    const auto work = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t i = worker; i < days.size(); i += stride) {
            table.rows[i] = assemble_day_features(cfg, by_day[i], provider, days[i]);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, days.size());
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w, workers);
        }
    }
    return table;
}

void write_feature_csv(const FeatureTable& table, std::ostream& out) {
    std::vector<std::string> header{"date", "tweet_count", "empty_day"};
    header.insert(header.end(), table.names.begin(), table.names.end());
    csv::write_row(out, header);
    std::vector<std::string> fields;
    for (const DayFeatures& row : table.rows) {
        fields.clear();
        fields.push_back(format_date(row.date));
        fields.push_back(std::to_string(row.tweet_count));
        fields.emplace_back(row.empty_embedding || row.tweet_count == 0 ? "1" : "0");
        for (double v : row.x) {
            fields.push_back(csv::format_double(v));
        }
        csv::write_row(out, fields);
    }
}

FeatureTable read_feature_csv(std::istream& in) {
    const auto header = csv::read_row(in);
    if (!header || header->size() < 2 || (*header)[0] != "date") {
        throw FormatError("feature CSV must start with a 'date' column");
    }
    std::size_t first_feature = 1;
    int tweet_count_col = -1;
    int empty_col = -1;
    while (first_feature < header->size()) {
        const std::string& name = (*header)[first_feature];
        if (name == "tweet_count") {
            tweet_count_col = static_cast<int>(first_feature);
        } else if (name == "empty_day") {
            empty_col = static_cast<int>(first_feature);
        } else {
            break;
        }
        ++first_feature;
    }
    FeatureTable table;
    table.names.assign(header->begin() + static_cast<std::ptrdiff_t>(first_feature), header->end());
    if (table.names.empty()) {
        throw FormatError("feature CSV has no feature columns");
    }
    std::size_t line_no = 1;
    while (auto row = csv::read_row(in)) {
        ++line_no;
        if (row->size() == 1 && row->front().empty()) {
            continue;
        }
        if (row->size() != header->size()) {
            throw FormatError("feature CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header->size()) + " columns");
        }
        DayFeatures day;
        day.date = parse_date((*row)[0]);
        if (tweet_count_col >= 0) {
            const auto n = csv::parse_int((*row)[static_cast<std::size_t>(tweet_count_col)]);
            if (!n || *n < 0) {
                throw FormatError("feature CSV line " + std::to_string(line_no) + ": bad tweet_count");
            }
            day.tweet_count = static_cast<std::size_t>(*n);
        }
        if (empty_col >= 0) {
            day.empty_embedding = (*row)[static_cast<std::size_t>(empty_col)] == "1";
        }
        for (std::size_t i = first_feature; i < row->size(); ++i) {
            const auto v = csv::parse_double((*row)[i]);
            if (!v || !std::isfinite(*v)) {
                throw FormatError("feature CSV line " + std::to_string(line_no) + ": non-numeric value in column '" +
                                  (*header)[i] + "'");
            }
            day.x.push_back(*v);
        }
        if (!table.rows.empty() && day.date <= table.rows.back().date) {
            throw FormatError("feature CSV dates must be strictly increasing (line " + std::to_string(line_no) + ")");
        }
        table.rows.push_back(std::move(day));
    }
    return table;
}

}  // namespace epialign::features
