// Recurrence plots and the eleven recurrence quantification measures, for
// both auto (Theiler-excluded) and cross configurations.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/embedding.hpp"
#include "facedyn/parallel.hpp"

namespace facedyn {

enum class ComplexityMode {
    range,     // max entropy = log2 of all integer lengths in [l_min, lmax]
    observed,  // max entropy = log2 of the distinct lengths actually seen
};

struct RqaConfig {
    double radius_frac = 0.20;  // cross default is 0.30 (see crqa)
    int theiler = 2;            // auto mode only; cross uses no exclusion
    int l_min = 4;
    int v_min = 4;
    ComplexityMode complexity = ComplexityMode::range;
    std::size_t stability_min_samples = 1000;  // below this, flag a warning

    void validate() const {
        if (radius_frac <= 0.0) throw InvalidParams("radius_frac must be > 0");
        if (theiler < 0) throw InvalidParams("theiler must be >= 0");
        if (l_min < 2) throw InvalidParams("l_min must be >= 2");
        if (v_min < 2) throw InvalidParams("v_min must be >= 2");
    }
};

struct RecurrencePlot {
    std::vector<std::uint8_t> cells;  // row-major na x nb
    std::size_t na = 0;
    std::size_t nb = 0;
    bool auto_mode = false;
    int theiler = 0;          // exclusion actually applied (0 in cross mode)
    double epsilon = 0.0;
    double mean_distance = 0.0;
    std::size_t valid_cells = 0;  // RR denominator (Theiler band excluded)
    bool short_window = false;    // fewer samples than the stability criterion

    bool at(std::size_t i, std::size_t j) const {
        return cells[i * nb + j] != 0;
    }
    // The Theiler band is the offsets |i-j| < theiler around the main
    // diagonal, so theiler=2 keeps |i-j| >= 2 and theiler=0 keeps everything.
    bool excluded(std::size_t i, std::size_t j) const {
        if (!auto_mode) return false;
        const auto d = (i > j) ? i - j : j - i;
        return d < static_cast<std::size_t>(theiler);
    }
};

// Builds the thresholded recurrence matrix. epsilon = radius_frac * d_mean
// where d_mean averages the pairwise distances that also enter the RR
// denominator: all (i,j) in cross mode, |i-j| > theiler in auto mode.
// Row-parallel; per-row partial sums reduce sequentially in index order so
// results are identical for any worker count.
inline RecurrencePlot recurrence_matrix(const Trajectory& a,
                                        const Trajectory* b,
                                        const RqaConfig& cfg) {
    cfg.validate();
    const bool auto_mode = (b == nullptr);
    const Trajectory& tb = auto_mode ? a : *b;
    if (a.count == 0 || tb.count == 0)
        throw EmptyTrajectory("recurrence_matrix needs non-empty trajectories");
    if (a.m != tb.m) throw InvalidParams("trajectory dimensions differ");

    RecurrencePlot plot;
    plot.na = a.count;
    plot.nb = tb.count;
    plot.auto_mode = auto_mode;
    plot.theiler = auto_mode ? cfg.theiler : 0;
    plot.short_window =
        std::min(a.count, tb.count) < cfg.stability_min_samples;
    plot.cells.assign(plot.na * plot.nb, 0);

    const int m = a.m;
    const auto theiler = static_cast<std::size_t>(plot.theiler);

    std::vector<double> row_sum(plot.na, 0.0);
    std::vector<std::size_t> row_cnt(plot.na, 0);
    parallel_for(plot.na, [&](std::size_t i) {
        const double* pi = a.point(i);
        double s = 0.0;
        std::size_t c = 0;
        for (std::size_t j = 0; j < plot.nb; ++j) {
            if (auto_mode) {
                const auto d = (i > j) ? i - j : j - i;
                if (d < theiler) continue;
            }
            const double* pj = tb.point(j);
            double d2 = 0.0;
            for (int k = 0; k < m; ++k) {
                const double diff = pi[k] - pj[k];
                d2 += diff * diff;
            }
            s += std::sqrt(d2);
            ++c;
        }
        row_sum[i] = s;
        row_cnt[i] = c;
    });
    double total = 0.0;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < plot.na; ++i) {
        total += row_sum[i];
        valid += row_cnt[i];
    }
    if (valid == 0)
        throw EmptyTrajectory("no valid cells outside the Theiler band");
    plot.valid_cells = valid;
    plot.mean_distance = total / static_cast<double>(valid);
    plot.epsilon = cfg.radius_frac * plot.mean_distance;

    const double eps2 = plot.epsilon * plot.epsilon;
    parallel_for(plot.na, [&](std::size_t i) {
        const double* pi = a.point(i);
        std::uint8_t* row = plot.cells.data() + i * plot.nb;
        for (std::size_t j = 0; j < plot.nb; ++j) {
            if (auto_mode) {
                const auto d = (i > j) ? i - j : j - i;
                if (d < theiler) continue;
            }
            const double* pj = tb.point(j);
            double d2 = 0.0;
            for (int k = 0; k < m; ++k) {
                const double diff = pi[k] - pj[k];
                d2 += diff * diff;
            }
            if (d2 <= eps2) row[j] = 1;
        }
    });
    return plot;
}

struct RqaMetrics {
    double rr = 0.0;
    double det = 0.0;
    double l_mean = 0.0;
    double l_sd = 0.0;
    double entropy = 0.0;     // bits
    double complexity = 0.0;  // bits, max entropy minus observed entropy
    double divergence = 0.0;  // 1 / lmax
    double trend = 0.0;       // density slope per diagonal
    double lam = 0.0;
    double tt = 0.0;
    double vmax = 0.0;
    double lmax = 0.0;
    bool no_recurrent_points = false;  // line measures forced to 0
    bool divergence_defined = true;
    bool short_window = false;

    std::map<std::string, double> as_map() const {
        return {{"rr", rr},           {"det", det},
                {"l_mean", l_mean},   {"l_sd", l_sd},
                {"entropy", entropy}, {"complexity", complexity},
                {"divergence", divergence}, {"trend", trend},
                {"lam", lam},         {"tt", tt},
                {"vmax", vmax},       {"lmax", lmax}};
    }
};

inline const std::vector<std::string>& rqa_metric_names() {
    static const std::vector<std::string> names = {
        "rr",         "det",        "l_mean", "l_sd", "entropy", "complexity",
        "divergence", "trend",      "lam",    "tt",   "vmax",    "lmax"};
    return names;
}

// The eleven measures emitted as feature columns (lmax enters via divergence).
inline const std::vector<std::string>& table_metric_names() {
    static const std::vector<std::string> names = {
        "rr",         "det",   "l_mean", "l_sd", "entropy", "complexity",
        "divergence", "trend", "lam",    "tt",   "vmax"};
    return names;
}

inline std::vector<double> table_metric_values(const RqaMetrics& m) {
    return {m.rr,         m.det,   m.l_mean, m.l_sd, m.entropy, m.complexity,
            m.divergence, m.trend, m.lam,    m.tt,   m.vmax};
}

namespace detail {

struct LineHistogram {
    std::map<std::size_t, std::size_t> counts;  // length -> #lines
    std::size_t total_points = 0;               // points in counted lines
    std::size_t total_lines = 0;
    std::size_t max_len = 0;

    void add(std::size_t len, std::size_t min_len) {
        if (len < min_len) return;
        ++counts[len];
        ++total_lines;
        total_points += len;
        max_len = std::max(max_len, len);
    }
};

// Shannon entropy (bits) of the line-length distribution.
inline double line_entropy(const LineHistogram& h) {
    if (h.total_lines == 0) return 0.0;
    double e = 0.0;
    for (const auto& [len, cnt] : h.counts) {
        const double p =
            static_cast<double>(cnt) / static_cast<double>(h.total_lines);
        e -= p * std::log2(p);
    }
    return e;
}

}  // namespace detail

// All eleven Table-style measures plus lmax. Diagonal and vertical runs
// truncated by the matrix border (or the Theiler band) count as lines.
inline RqaMetrics rqa_metrics(const RecurrencePlot& plot, const RqaConfig& cfg) {
    cfg.validate();
    RqaMetrics out;
    out.short_window = plot.short_window;

    std::size_t recurrent = 0;
    for (std::size_t i = 0; i < plot.na; ++i)
        for (std::size_t j = 0; j < plot.nb; ++j)
            if (plot.at(i, j)) ++recurrent;
    out.rr = static_cast<double>(recurrent) /
             static_cast<double>(plot.valid_cells);

    if (recurrent == 0) {
        out.no_recurrent_points = true;
        out.divergence_defined = false;
        return out;
    }

    // Diagonal lines: walk every diagonal offset; in auto mode the Theiler
    // band is already all-false so excluded diagonals contribute nothing.
    detail::LineHistogram diag;
    const auto lmin = static_cast<std::size_t>(cfg.l_min);
    for (std::ptrdiff_t off = -(static_cast<std::ptrdiff_t>(plot.na) - 1);
         off < static_cast<std::ptrdiff_t>(plot.nb); ++off) {
        std::size_t i = off < 0 ? static_cast<std::size_t>(-off) : 0;
        std::size_t j = off < 0 ? 0 : static_cast<std::size_t>(off);
        std::size_t run = 0;
        for (; i < plot.na && j < plot.nb; ++i, ++j) {
            if (plot.at(i, j)) {
                ++run;
            } else {
                diag.add(run, lmin);
                run = 0;
            }
        }
        diag.add(run, lmin);
    }

    // Vertical lines.
    detail::LineHistogram vert;
    const auto vmin = static_cast<std::size_t>(cfg.v_min);
    for (std::size_t j = 0; j < plot.nb; ++j) {
        std::size_t run = 0;
        for (std::size_t i = 0; i < plot.na; ++i) {
            if (plot.at(i, j)) {
                ++run;
            } else {
                vert.add(run, vmin);
                run = 0;
            }
        }
        vert.add(run, vmin);
    }

    out.det = static_cast<double>(diag.total_points) /
              static_cast<double>(recurrent);
    if (diag.total_lines > 0) {
        const double nl = static_cast<double>(diag.total_lines);
        out.l_mean = static_cast<double>(diag.total_points) / nl;
        double ss = 0.0;
        for (const auto& [len, cnt] : diag.counts) {
            const double d = static_cast<double>(len) - out.l_mean;
            ss += static_cast<double>(cnt) * d * d;
        }
        out.l_sd = std::sqrt(ss / nl);  // population sd over lines
        out.lmax = static_cast<double>(diag.max_len);
        out.entropy = detail::line_entropy(diag);
        double max_entropy = 0.0;
        if (cfg.complexity == ComplexityMode::range) {
            max_entropy =
                std::log2(static_cast<double>(diag.max_len - lmin + 1));
        } else {
            max_entropy = std::log2(static_cast<double>(diag.counts.size()));
        }
        out.complexity = max_entropy - out.entropy;
        out.divergence = 1.0 / static_cast<double>(diag.max_len);
    } else {
        out.divergence_defined = false;
    }

    out.lam = static_cast<double>(vert.total_points) /
              static_cast<double>(recurrent);
    if (vert.total_lines > 0) {
        out.tt = static_cast<double>(vert.total_points) /
                 static_cast<double>(vert.total_lines);
        out.vmax = static_cast<double>(vert.max_len);
    }

    // Trend: least-squares slope of recurrence density against diagonal
    // index d = |i-j|, over d outside the Theiler band up to N - 2*l_min.
    const std::size_t n = std::min(plot.na, plot.nb);
    const auto d_lo = static_cast<std::size_t>(plot.theiler);
    const std::size_t d_hi =
        n > 2 * lmin ? n - 2 * lmin : 0;
    if (d_hi >= d_lo + 1) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, cnt = 0.0;
        for (std::size_t d = d_lo; d <= d_hi; ++d) {
            std::size_t rec = 0, cells = 0;
            for (std::size_t i = 0; i < plot.na; ++i) {
                if (i + d < plot.nb) {
                    ++cells;
                    if (plot.at(i, i + d)) ++rec;
                }
                if (i >= d && i - d < plot.nb && d > 0) {
                    ++cells;
                    if (plot.at(i, i - d)) ++rec;
                }
            }
            if (cells == 0) continue;
            const double x = static_cast<double>(d);
            const double y =
                static_cast<double>(rec) / static_cast<double>(cells);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            cnt += 1.0;
        }
        const double denom = cnt * sxx - sx * sx;
        if (denom > 0.0) out.trend = (cnt * sxy - sx * sy) / denom;
    }
    return out;
}

// Auto RQA of one rescaled series.
inline RqaMetrics rqa(const Series& rescaled, const EmbeddingParams& p,
                      const RqaConfig& cfg) {
    const Trajectory tr = embed(rescaled, p);
    return rqa_metrics(recurrence_matrix(tr, nullptr, cfg), cfg);
}

// Cross RQA: both series rescaled independently by the caller, embedded with
// the same parameters; no Theiler exclusion, full matrix.
inline RqaMetrics crqa(const Series& rescaled_a, const Series& rescaled_b,
                       const EmbeddingParams& p, const RqaConfig& cfg) {
    const Trajectory ta = embed(rescaled_a, p);
    const Trajectory tb = embed(rescaled_b, p);
    return rqa_metrics(recurrence_matrix(ta, &tb, cfg), cfg);
}

// Compact run-length-encoded text export: one line per row, runs of
// recurrent cells as "start:length" pairs separated by spaces.
inline std::string encode_plot_rle(const RecurrencePlot& plot) {
    std::string out;
    out += "rle " + std::to_string(plot.na) + " " + std::to_string(plot.nb) +
           "\n";
    for (std::size_t i = 0; i < plot.na; ++i) {
        bool first = true;
        for (std::size_t j = 0; j < plot.nb;) {
            if (!plot.at(i, j)) {
                ++j;
                continue;
            }
            std::size_t run = 0;
            const std::size_t start = j;
            while (j < plot.nb && plot.at(i, j)) {
                ++run;
                ++j;
            }
            if (!first) out += ' ';
            out += std::to_string(start) + ":" + std::to_string(run);
            first = false;
        }
        out += '\n';
    }
    return out;
}

}  // namespace facedyn
