// Phase-space reconstruction utilities: unit rescaling, average mutual
// information (lag selection), false nearest neighbours (dimension
// selection), and time-delay embedding.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "facedyn/common.hpp"

namespace facedyn {

struct EmbeddingParams {
    int tau = 20;
    int m = 4;

    void validate() const {
        if (tau < 1 || m < 1) throw InvalidParams("need tau >= 1 and m >= 1");
    }
};

struct RescaledSeries {
    Series values;
    bool constant_input = false;  // flagged; output is all zeros
};

inline RescaledSeries rescale_unit(const Series& x) {
    if (x.empty()) throw EmptyInput("rescale_unit on empty series");
    double lo = x[0], hi = x[0];
    for (double v : x) {
        if (is_missing(v) || !std::isfinite(v))
            throw InvalidParams("rescale_unit requires finite values");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    RescaledSeries out;
    out.values.resize(x.size());
    if (hi - lo <= 0.0) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        out.constant_input = true;
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        out.values[i] = (x[i] - lo) / (hi - lo);
    return out;
}

// ---------------------------------------------------------------------------
// Average mutual information with an equal-width histogram estimator.
// ---------------------------------------------------------------------------

struct AmiConfig {
    int bins = 16;
    int max_lag = 100;
    double plateau_tol = 0.02;  // relative change of the smoothed curve
    int plateau_len = 5;        // lags the change must stay small for
};

namespace detail {

inline int hist_bin(double v, int bins) {
    // Values are already in [0,1]; clamp guards the upper edge.
    int b = static_cast<int>(v * bins);
    return std::clamp(b, 0, bins - 1);
}

// MI in bits between paired samples, both in [0,1].
inline double mi_pairs(const double* a, const double* b, std::size_t n,
                       int bins) {
    std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
    std::vector<double> pa(bins, 0.0), pb(bins, 0.0);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int ba = hist_bin(a[i], bins);
        const int bb = hist_bin(b[i], bins);
        joint[static_cast<std::size_t>(ba) * bins + bb] += w;
        pa[ba] += w;
        pb[bb] += w;
    }
    double mi = 0.0;
    for (int i = 0; i < bins; ++i)
        for (int j = 0; j < bins; ++j) {
            const double p = joint[static_cast<std::size_t>(i) * bins + j];
            if (p > 0.0) mi += p * std::log2(p / (pa[i] * pb[j]));
        }
    return std::max(0.0, mi);
}

}  // namespace detail

struct AmiResult {
    std::vector<double> curve;  // curve[k-1] = MI at lag k, bits
    int selected_tau = 0;
};

// First-plateau selection: smooth the curve with a centered moving average
// of plateau_len lags, then pick the first lag from which the smoothed
// curve's relative step stays below plateau_tol for plateau_len steps.
// Falls back to the first local minimum of the raw curve, then max_lag.
inline AmiResult ami(const Series& x, const AmiConfig& cfg = {}) {
    const std::size_t n = x.size();
    if (cfg.max_lag < 1 || cfg.bins < 2) throw InvalidParams("bad AMI config");
    if (n < static_cast<std::size_t>(cfg.max_lag) + 2)
        throw SeriesTooShort("series too short for requested AMI max_lag");
    for (double v : x)
        if (v < 0.0 || v > 1.0)
            throw InvalidParams("ami expects a series rescaled to [0,1]");

    AmiResult res;
    res.curve.resize(cfg.max_lag);
    for (int k = 1; k <= cfg.max_lag; ++k)
        res.curve[k - 1] =
            detail::mi_pairs(x.data(), x.data() + k, n - k, cfg.bins);

    const int L = cfg.max_lag;
    std::vector<double> ma(L);
    const int half = cfg.plateau_len / 2;
    for (int k = 0; k < L; ++k) {
        const int lo = std::max(0, k - half);
        const int hi = std::min(L - 1, k + half);
        double s = 0.0;
        for (int j = lo; j <= hi; ++j) s += res.curve[j];
        ma[k] = s / static_cast<double>(hi - lo + 1);
    }

    auto plateau_at = [&](int k) {
        for (int j = k; j < k + cfg.plateau_len && j + 1 < L; ++j) {
            const double denom = std::max(std::abs(ma[j]), 1e-12);
            if (std::abs(ma[j + 1] - ma[j]) / denom >= cfg.plateau_tol)
                return false;
        }
        return true;
    };
    res.selected_tau = 0;
    for (int k = 0; k < L; ++k)
        if (plateau_at(k)) {
            res.selected_tau = k + 1;
            break;
        }
    if (res.selected_tau == 0) {
        for (int k = 1; k + 1 < L; ++k)
            if (res.curve[k] < res.curve[k - 1] &&
                res.curve[k] <= res.curve[k + 1]) {
                res.selected_tau = k + 1;
                break;
            }
    }
    if (res.selected_tau == 0) res.selected_tau = L;
    return res;
}

// ---------------------------------------------------------------------------
// Time-delay embedding.
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> data;  // flat, point i at data[i*m .. i*m+m)
    std::size_t count = 0;
    int m = 1;

    const double* point(std::size_t i) const { return data.data() + i * m; }
};

inline Trajectory embed(const Series& x, const EmbeddingParams& p) {
    p.validate();
    const std::size_t span = static_cast<std::size_t>(p.m - 1) * p.tau;
    if (x.size() <= span)
        throw SeriesTooShort("series length must exceed (m-1)*tau");
    Trajectory tr;
    tr.m = p.m;
    tr.count = x.size() - span;
    tr.data.resize(tr.count * p.m);
    for (std::size_t i = 0; i < tr.count; ++i)
        for (int d = 0; d < p.m; ++d)
            tr.data[i * p.m + d] = x[i + static_cast<std::size_t>(d) * p.tau];
    return tr;
}

// ---------------------------------------------------------------------------
// False nearest neighbours (Kennel criteria).
// ---------------------------------------------------------------------------

struct FnnConfig {
    int max_m = 8;
    double rtol = 10.0;       // criterion 1: added-coordinate stretch ratio
    double atol = 2.0;        // criterion 2: distance vs attractor size
    double threshold = 0.01;  // selected_m = first fraction below this
};

struct FnnResult {
    std::vector<double> fractions;  // fractions[m-1] = false fraction at m
    int selected_m = 0;             // 0 when no m drops below threshold
};

inline FnnResult fnn(const Series& x, int tau, const FnnConfig& cfg = {}) {
    if (tau < 1 || cfg.max_m < 1) throw InvalidParams("bad FNN config");
    const std::size_t n = x.size();
    // Points must support the (m+1)-th coordinate for every m tested.
    if (n <= static_cast<std::size_t>(cfg.max_m) * tau + 1)
        throw SeriesTooShort("series too short for requested FNN max_m");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double attractor_size =
        std::sqrt(var / static_cast<double>(n));

    FnnResult res;
    res.fractions.resize(cfg.max_m);
    for (int m = 1; m <= cfg.max_m; ++m) {
        const std::size_t count = n - static_cast<std::size_t>(m) * tau;
        std::size_t false_count = 0, total = 0;
        for (std::size_t i = 0; i < count; ++i) {
            // Nearest neighbour in the m-dimensional embedding.
            double best = std::numeric_limits<double>::infinity();
            std::size_t bj = i;
            for (std::size_t j = 0; j < count; ++j) {
                if (j == i) continue;
                double d2 = 0.0;
                for (int d = 0; d < m; ++d) {
                    const double diff =
                        x[i + static_cast<std::size_t>(d) * tau] -
                        x[j + static_cast<std::size_t>(d) * tau];
                    d2 += diff * diff;
                }
                if (d2 < best) {
                    best = d2;
                    bj = j;
                }
            }
            if (bj == i) continue;
            const double rm = std::sqrt(best);
            const double extra =
                x[i + static_cast<std::size_t>(m) * tau] -
                x[bj + static_cast<std::size_t>(m) * tau];
            const double rm1 = std::sqrt(best + extra * extra);
            bool is_false = false;
            if (rm > 0.0 && std::abs(extra) / rm > cfg.rtol) is_false = true;
            if (attractor_size > 0.0 && rm1 / attractor_size > cfg.atol)
                is_false = true;
            ++total;
            if (is_false) ++false_count;
        }
        res.fractions[m - 1] =
            total == 0 ? 0.0
                       : static_cast<double>(false_count) /
                             static_cast<double>(total);
        if (res.selected_m == 0 && res.fractions[m - 1] < cfg.threshold)
            res.selected_m = m;
    }
    return res;
}

}  // namespace facedyn
