#include "epialign/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "epialign/csv.hpp"
#include "epialign/error.hpp"

namespace epialign::report {

using experiment::ExperimentResult;
using experiment::SettingName;

std::string format_correlation(const std::optional<double>& rho) {
    return rho ? csv::format_fixed(*rho, 6) : "undefined";
}

namespace {

constexpr SettingName kSettingOrder[] = {SettingName::I,  SettingName::II, SettingName::III,
                                         SettingName::IV, SettingName::V,  SettingName::custom};

std::string cases_label(corpus::CaseMode mode) {
    return mode == corpus::CaseMode::total ? "Total" : "New";
}

std::vector<SettingName> settings_present(const std::vector<const ExperimentResult*>& rs) {
    std::vector<SettingName> out;
    for (SettingName s : kSettingOrder) {
        if (std::any_of(rs.begin(), rs.end(), [s](const ExperimentResult* r) { return r->setting == s; })) {
            out.push_back(s);
        }
    }
    return out;
}

std::string domestic_table(const std::vector<const ExperimentResult*>& rs) {
    using Key = std::tuple<std::string, int, std::string>;  // country, case mode, label
    std::map<Key, std::map<SettingName, const ExperimentResult*>> grid;
    for (const ExperimentResult* r : rs) {
        auto& row = grid[{r->source_country, static_cast<int>(r->case_mode), r->label}];
        if (!row.emplace(r->setting, r).second) {
            throw FormatError("two domestic results for " + r->source_country + "/" +
                              std::string(corpus::to_string(r->case_mode)) + "/" + r->label + "/setting " +
                              std::string(experiment::to_string(r->setting)));
        }
    }
    const std::vector<SettingName> settings = settings_present(rs);
    std::ostringstream out;
    std::vector<std::string> header{"country", "cases", "embed"};
    for (SettingName s : settings) header.emplace_back(experiment::to_string(s));
    csv::write_row(out, header);
    for (const auto& [key, row] : grid) {
        std::vector<std::string> fields{std::get<0>(key),
                                        cases_label(static_cast<corpus::CaseMode>(std::get<1>(key))),
                                        std::get<2>(key)};
        for (SettingName s : settings) {
            const auto it = row.find(s);
            fields.push_back(it == row.end() ? "" : format_correlation(it->second->spearman));
        }
        csv::write_row(out, fields);
    }
    return out.str();
}

std::string transfer_table(const std::vector<const ExperimentResult*>& rs) {
    std::set<std::string> targets;
    using Key = std::tuple<std::string, std::string, SettingName>;  // source, label, setting
    std::map<Key, std::map<std::string, const ExperimentResult*>> grid;
    for (const ExperimentResult* r : rs) {
        targets.insert(r->target_country);
        auto& row = grid[{r->source_country, r->label, r->setting}];
        if (!row.emplace(r->target_country, r).second) {
            throw FormatError("two transfer results for " + r->source_country + "->" + r->target_country + "/" +
                              r->label + "/setting " + std::string(experiment::to_string(r->setting)));
        }
    }
    std::ostringstream out;
    std::vector<std::string> header{"source", "embed", "setting"};
    header.insert(header.end(), targets.begin(), targets.end());
    csv::write_row(out, header);
    for (const auto& [key, row] : grid) {
        std::vector<std::string> fields{std::get<0>(key), std::get<1>(key),
                                        std::string(experiment::to_string(std::get<2>(key)))};
        for (const std::string& t : targets) {
            const auto it = row.find(t);
            fields.push_back(it == row.end() ? "" : format_correlation(it->second->spearman));
        }
        csv::write_row(out, fields);
    }
    return out.str();
}

std::string frequency_timeline(const std::vector<CountryFrequency>& freqs) {
    std::map<std::string, const CountryFrequency*> by_country;
    std::set<Date> dates;
    for (const CountryFrequency& f : freqs) {
        if (!by_country.emplace(f.country, &f).second) {
            throw FormatError("two frequency series for " + f.country);
        }
        for (const auto& [d, n] : f.counts) dates.insert(d);
    }
    std::ostringstream out;
    std::vector<std::string> header{"date"};
    for (const auto& [country, f] : by_country) header.push_back(country);
    csv::write_row(out, header);
    for (Date d : dates) {
        std::vector<std::string> fields{format_date(d)};
        for (const auto& [country, f] : by_country) {
            const auto it = f->counts.find(d);
            fields.push_back(it == f->counts.end() ? "" : std::to_string(it->second));
        }
        csv::write_row(out, fields);
    }
    return out.str();
}

std::string filter_stats_table(const std::vector<CountryFilterStats>& stats) {
    std::map<std::string, corpus::FilterStats> by_country;
    for (const CountryFilterStats& s : stats) {
        if (!by_country.emplace(s.country, s.stats).second) {
            throw FormatError("two filter statistics entries for " + s.country);
        }
    }
    std::ostringstream out;
    std::vector<std::string> header{"metric"};
    for (const auto& [country, s] : by_country) header.push_back(country);
    csv::write_row(out, header);
    const auto emit = [&](const std::string& name, auto getter) {
        std::vector<std::string> fields{name};
        for (const auto& [country, s] : by_country) fields.push_back(std::to_string(getter(s)));
        csv::write_row(out, fields);
    };
    emit("Pre", [](const corpus::FilterStats& s) { return s.pre_count; });
    emit("Post", [](const corpus::FilterStats& s) { return s.post_count; });
    for (corpus::RemovalReason reason : corpus::kRemovalReasons) {
        emit("removed:" + std::string(corpus::to_string(reason)),
             [reason](const corpus::FilterStats& s) { return s.removed_by(reason); });
    }
    return out.str();
}

}  // namespace

std::vector<ReportFile> emit_report(const ReportInputs& inputs, std::uint8_t layouts) {
    const auto wants = [layouts](Layout l) { return (layouts & static_cast<std::uint8_t>(l)) != 0; };
    std::vector<const ExperimentResult*> domestic;
    std::map<corpus::CaseMode, std::vector<const ExperimentResult*>> transfer;
    for (const ExperimentResult& r : inputs.results) {
        if (r.domestic()) {
            domestic.push_back(&r);
        } else {
            transfer[r.case_mode].push_back(&r);
        }
    }

    std::vector<ReportFile> files;
    if (wants(Layout::domestic_table) && !domestic.empty()) {
        files.push_back({"domestic_table.csv", domestic_table(domestic)});
    }
    if (wants(Layout::transfer_table)) {
        for (const auto& [mode, rs] : transfer) {
            files.push_back({"transfer_table_" + std::string(corpus::to_string(mode)) + ".csv", transfer_table(rs)});
        }
    }
    if (wants(Layout::frequency_timeline) && !inputs.frequencies.empty()) {
        files.push_back({"frequency_timeline.csv", frequency_timeline(inputs.frequencies)});
    }
    if (wants(Layout::filter_stats) && !inputs.filter_stats.empty()) {
        files.push_back({"filter_stats.csv", filter_stats_table(inputs.filter_stats)});
    }

    std::set<std::string> upper_bound_settings;
    std::size_t undefined = 0;
    for (const ExperimentResult& r : inputs.results) {
        if (r.upper_bound) upper_bound_settings.insert(std::string(experiment::to_string(r.setting)));
        if (!r.spearman) ++undefined;
    }
    std::ostringstream meta;
    csv::write_row(meta, {"key", "value"});
    csv::write_row(meta, {"results", std::to_string(inputs.results.size())});
    csv::write_row(meta, {"domestic_results", std::to_string(domestic.size())});
    csv::write_row(meta, {"transfer_results", std::to_string(inputs.results.size() - domestic.size())});
    csv::write_row(meta, {"undefined_correlations", std::to_string(undefined)});
    std::string ub;
    for (const std::string& s : upper_bound_settings) ub += (ub.empty() ? "" : ";") + s;
    csv::write_row(meta, {"upper_bound_settings", ub});
    csv::write_row(meta, {"metric", "spearman (pearson of average ranks)"});
    files.push_back({"metadata.csv", meta.str()});
    std::sort(files.begin(), files.end(), [](const ReportFile& a, const ReportFile& b) { return a.name < b.name; });
    return files;
}

}  // namespace epialign::report
