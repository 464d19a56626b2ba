// Preprocessing stages 2-5: confidence masking, gap interpolation, zero-phase
// low-pass filtering of contiguous segments, screen normalization.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "facedyn/butterworth.hpp"
#include "facedyn/common.hpp"
#include "facedyn/keypoints.hpp"

namespace facedyn {

struct PreprocessConfig {
    double conf_threshold = 0.30;
    std::size_t max_gap = 60;  // frames
    int filter_order = 4;
    double cutoff_hz = 10.0;
    double screen_w = 2560.0;
    double screen_h = 1440.0;

    void validate(double fps) const {
        if (conf_threshold < 0.0 || conf_threshold > 1.0)
            throw InvalidParams("conf_threshold must lie in [0,1]");
        if (cutoff_hz >= fps / 2.0)
            throw InvalidParams("cutoff must be below Nyquist");
        if (screen_w <= 0.0 || screen_h <= 0.0)
            throw InvalidParams("screen dimensions must be positive");
    }
};

// Samples with confidence strictly below the threshold become missing.
inline KeypointSeries mask_low_confidence(KeypointSeries s,
                                          const PreprocessConfig& cfg) {
    for (int l = 0; l < kFaceLandmarks; ++l) {
        for (std::size_t t = 0; t < s.length; ++t) {
            if (s.confidence[l][t] < cfg.conf_threshold) {
                s.x[l][t] = kMissing;
                s.y[l][t] = kMissing;
            }
        }
    }
    return s;
}

// Linearly fills missing runs of length <= max_gap that have valid samples on
// both sides. Edge runs and longer runs are left missing; valid samples are
// never altered.
inline Series interpolate_gaps_series(Series v, std::size_t max_gap) {
    const std::size_t n = v.size();
    std::size_t t = 0;
    while (t < n) {
        if (!is_missing(v[t])) { ++t; continue; }
        std::size_t run_end = t;
        while (run_end + 1 < n && is_missing(v[run_end + 1])) ++run_end;
        const std::size_t run_len = run_end - t + 1;
        const bool left_ok = t > 0;
        const bool right_ok = run_end + 1 < n;
        if (left_ok && right_ok && run_len <= max_gap) {
            const double lo = v[t - 1];
            const double hi = v[run_end + 1];
            const double span = static_cast<double>(run_len + 1);
            for (std::size_t k = 0; k < run_len; ++k)
                v[t + k] = lo + (hi - lo) * static_cast<double>(k + 1) / span;
        }
        t = run_end + 1;
    }
    return v;
}

inline KeypointSeries interpolate_gaps(KeypointSeries s,
                                       const PreprocessConfig& cfg) {
    for (int l = 0; l < kFaceLandmarks; ++l) {
        s.x[l] = interpolate_gaps_series(std::move(s.x[l]), cfg.max_gap);
        s.y[l] = interpolate_gaps_series(std::move(s.y[l]), cfg.max_gap);
    }
    return s;
}

struct SegmentFlag {
    std::size_t begin;
    std::size_t length;
};

struct FilteredSeries {
    Series values;
    // Contiguous valid segments too short to filter; passed through unchanged.
    std::vector<SegmentFlag> too_short;
};

// Zero-phase low-pass applied to each contiguous non-missing segment.
inline FilteredSeries lowpass_zero_phase(const Series& signal, double fps,
                                         const PreprocessConfig& cfg) {
    const auto filter = design_butterworth_lowpass(cfg.filter_order,
                                                   cfg.cutoff_hz, fps);
    const std::size_t min_len = filtfilt_pad_length(cfg.filter_order) + 1;
    FilteredSeries out;
    out.values = signal;
    const std::size_t n = signal.size();
    std::size_t t = 0;
    while (t < n) {
        if (is_missing(signal[t])) { ++t; continue; }
        std::size_t seg_end = t;
        while (seg_end + 1 < n && !is_missing(signal[seg_end + 1])) ++seg_end;
        const std::size_t seg_len = seg_end - t + 1;
        if (seg_len >= min_len) {
            std::vector<double> seg(signal.begin() + static_cast<std::ptrdiff_t>(t),
                                    signal.begin() + static_cast<std::ptrdiff_t>(seg_end + 1));
            auto filtered = filtfilt(filter, seg);
            std::copy(filtered.begin(), filtered.end(),
                      out.values.begin() + static_cast<std::ptrdiff_t>(t));
        } else {
            out.too_short.push_back({t, seg_len});
        }
        t = seg_end + 1;
    }
    return out;
}

// x -> x/screen_w, y -> y/screen_h. Off-screen points may fall outside [0,1]
// and are preserved.
inline KeypointSeries normalize_screen(KeypointSeries s,
                                       const PreprocessConfig& cfg) {
    for (int l = 0; l < kFaceLandmarks; ++l) {
        for (std::size_t t = 0; t < s.length; ++t) {
            s.x[l][t] /= cfg.screen_w;
            s.y[l][t] /= cfg.screen_h;
        }
    }
    return s;
}

struct PreprocessResult {
    KeypointSeries series;
    std::vector<SegmentFlag> unfiltered_segments;  // merged across landmarks
};

// Fixed stage order: mask -> interpolate -> filter -> normalize.
inline PreprocessResult preprocess(KeypointSeries s, const PreprocessConfig& cfg) {
    cfg.validate(s.fps);
    PreprocessResult res;
    s = mask_low_confidence(std::move(s), cfg);
    s = interpolate_gaps(std::move(s), cfg);
    for (int l = 0; l < kFaceLandmarks; ++l) {
        auto fx = lowpass_zero_phase(s.x[l], s.fps, cfg);
        auto fy = lowpass_zero_phase(s.y[l], s.fps, cfg);
        s.x[l] = std::move(fx.values);
        s.y[l] = std::move(fy.values);
        for (const auto& f : fx.too_short) res.unfiltered_segments.push_back(f);
        for (const auto& f : fy.too_short) res.unfiltered_segments.push_back(f);
    }
    res.series = normalize_screen(std::move(s), cfg);
    return res;
}

}  // namespace facedyn
