#include "epialign/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epialign/error.hpp"

namespace epialign::stats {

std::vector<double> rank_average(std::span<const double> v) {
    if (v.empty()) {
        throw ContractError("rank_average: empty input");
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw ContractError("rank_average: non-finite input");
        }
    }
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && v[order[j]] == v[order[i]]) {
            ++j;
        }
        // Positions i+1 .. j (1-based) share their mean.
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ContractError("correlation: length mismatch");
    }
    if (a.size() < 2) {
        throw ContractError("correlation: need at least two points");
    }
    const auto n = static_cast<double>(a.size());
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    const double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ContractError("spearman: length mismatch");
    }
    if (a.size() < 2) {
        throw ContractError("spearman: need at least two points");
    }
    const std::vector<double> ra = rank_average(a);
    const std::vector<double> rb = rank_average(b);
    // Average ranks always sum to n(n+1)/2, so the mean is exact and the
    // centered ranks are exact half-integers.
    const double mean = 0.5 * static_cast<double>(a.size() + 1);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace epialign::stats
