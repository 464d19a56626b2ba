// Nine per-window summary statistics. Conventions: population sd
// (denominator n), quantiles by linear interpolation between order
// statistics, ac1 as the Pearson correlation of (x_t, x_{t+1}) pairs.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "facedyn/common.hpp"

namespace facedyn {

struct SummaryStats {
    double rms = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double ac1 = 0.0;
    bool ac1_degenerate = false;  // zero variance, ac1 reported as 0

    std::array<double, 9> as_array() const {
        return {rms, mean, sd, median, min, max, p25, p75, ac1};
    }
};

inline const std::array<std::string, 9>& stat_names() {
    static const std::array<std::string, 9> names = {
        "rms", "mean", "sd", "median", "min", "max", "p25", "p75", "ac1"};
    return names;
}

// Linear interpolation between order statistics of the sorted input.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 0) throw EmptyInput("quantile of empty window");
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(const double* data, std::size_t n) {
    if (n == 0) throw EmptyInput("summarize needs a non-empty window");
    SummaryStats s;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_missing(data[i]))
            throw InvalidParams("summarize window contains missing values");
        sum += data[i];
        sumsq += data[i] * data[i];
    }
    const double dn = static_cast<double>(n);
    s.mean = sum / dn;
    s.rms = std::sqrt(sumsq / dn);
    const double var = std::max(0.0, sumsq / dn - s.mean * s.mean);
    s.sd = std::sqrt(var);

    std::vector<double> sorted(data, data + n);
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.p25 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.50);
    s.p75 = quantile_sorted(sorted, 0.75);

    // Pearson correlation of consecutive pairs; degenerate when either
    // margin has zero variance.
    if (n < 2) {
        s.ac1 = 0.0;
        s.ac1_degenerate = true;
        return s;
    }
    const std::size_t m = n - 1;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        ma += data[i];
        mb += data[i + 1];
    }
    ma /= static_cast<double>(m);
    mb /= static_cast<double>(m);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double da = data[i] - ma;
        const double db = data[i + 1] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        s.ac1 = 0.0;
        s.ac1_degenerate = true;
    } else {
        s.ac1 = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    }
    return s;
}

inline SummaryStats summarize(const std::vector<double>& window) {
    return summarize(window.data(), window.size());
}

}  // namespace facedyn
