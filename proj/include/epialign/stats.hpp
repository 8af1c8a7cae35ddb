#pragma once

#include <optional>
#include <span>
#include <vector>

namespace epialign::stats {

/// 1-based ranks; tied values share the mean of the positions they occupy.
/// Throws ContractError on empty or non-finite input.
std::vector<double> rank_average(std::span<const double> v);

/// Pearson correlation of the average ranks. nullopt when either input is
/// fully tied (the correlation is undefined). Throws ContractError on a
/// length mismatch or fewer than two points.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

/// Pearson correlation; nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace epialign::stats
