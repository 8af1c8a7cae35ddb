#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epialign/corpus.hpp"
#include "epialign/date.hpp"
#include "epialign/experiment.hpp"

namespace epialign::report {

struct CountryFilterStats {
    std::string country;
    corpus::FilterStats stats;
};

struct CountryFrequency {
    std::string country;
    std::map<Date, std::size_t> counts;
};

struct ReportInputs {
    std::vector<experiment::ExperimentResult> results;
    std::vector<CountryFilterStats> filter_stats;
    std::vector<CountryFrequency> frequencies;
};

enum class Layout : std::uint8_t {
    domestic_table = 1U << 0U,
    transfer_table = 1U << 1U,
    frequency_timeline = 1U << 2U,
    filter_stats = 1U << 3U,
};

inline constexpr std::uint8_t kAllLayouts = 0x0F;

struct ReportFile {
    std::string name;
    std::string content;
};

/// Renders the requested tables as UTF-8 CSV documents with LF endings:
///   domestic_table.csv         rows (country, cases, embed) x settings
///   transfer_table_<mode>.csv  rows (source, embed, setting) x target countries
///   frequency_timeline.csv     date x country tweet counts
///   filter_stats.csv           pre/post/removed:<reason> x country
///   metadata.csv               key,value summary
/// Output depends only on the set of inputs, not their order. Tables without
/// data are omitted. Throws FormatError when two results claim the same cell.
std::vector<ReportFile> emit_report(const ReportInputs& inputs, std::uint8_t layouts = kAllLayouts);

/// Correlation cell text: 6 decimals, or "undefined".
std::string format_correlation(const std::optional<double>& rho);

}  // namespace epialign::report
