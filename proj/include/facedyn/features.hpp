// Facial feature channels from aligned landmarks, kinematic derivatives,
// sliding windows, and assembly of the per-window statistic columns.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "facedyn/align.hpp"
#include "facedyn/common.hpp"
#include "facedyn/keypoints.hpp"
#include "facedyn/stats.hpp"

namespace facedyn {

// Landmark groups (0-based ids within the 70-point face model).
struct FeatureLandmarks {
    std::array<int, 2> left_upper_lid = {38, 39};
    std::array<int, 2> left_lower_lid = {41, 42};
    std::array<int, 2> right_upper_lid = {44, 45};
    std::array<int, 2> right_lower_lid = {47, 48};
    std::array<int, 6> left_eye_contour = {37, 38, 39, 40, 41, 42};
    std::array<int, 6> right_eye_contour = {43, 44, 45, 46, 47, 48};
    int upper_lip = 63;
    int lower_lip = 67;
    int left_pupil = 68;   // listed as 69/70 one-based in the source model
    int right_pupil = 69;
};

namespace detail {

inline bool landmark_valid(const KeypointSeries& s, int id, std::size_t t) {
    return !is_missing(s.x[id][t]) && !is_missing(s.y[id][t]);
}

template <std::size_t N>
inline bool all_valid(const KeypointSeries& s, const std::array<int, N>& ids,
                      std::size_t t) {
    for (int id : ids)
        if (!landmark_valid(s, id, t)) return false;
    return true;
}

template <std::size_t N>
inline Vec2 centroid_at(const KeypointSeries& s, const std::array<int, N>& ids,
                        std::size_t t) {
    Vec2 c{0.0, 0.0};
    for (int id : ids) {
        c.x += s.x[id][t] / static_cast<double>(N);
        c.y += s.y[id][t] / static_cast<double>(N);
    }
    return c;
}

}  // namespace detail

// Mean over both eyes of the distance between the midpoint of the upper lid
// pair and the midpoint of the lower lid pair.
inline Series blink_aperture(const KeypointSeries& s,
                             const FeatureLandmarks& lm = {}) {
    Series out(s.length, kMissing);
    for (std::size_t t = 0; t < s.length; ++t) {
        if (!detail::all_valid(s, lm.left_upper_lid, t) ||
            !detail::all_valid(s, lm.left_lower_lid, t) ||
            !detail::all_valid(s, lm.right_upper_lid, t) ||
            !detail::all_valid(s, lm.right_lower_lid, t))
            continue;
        const Vec2 lu = detail::centroid_at(s, lm.left_upper_lid, t);
        const Vec2 ll = detail::centroid_at(s, lm.left_lower_lid, t);
        const Vec2 ru = detail::centroid_at(s, lm.right_upper_lid, t);
        const Vec2 rl = detail::centroid_at(s, lm.right_lower_lid, t);
        const double left = std::hypot(lu.x - ll.x, lu.y - ll.y);
        const double right = std::hypot(ru.x - rl.x, ru.y - rl.y);
        out[t] = 0.5 * (left + right);
    }
    return out;
}

inline Series mouth_aperture(const KeypointSeries& s,
                             const FeatureLandmarks& lm = {}) {
    Series out(s.length, kMissing);
    for (std::size_t t = 0; t < s.length; ++t) {
        if (!detail::landmark_valid(s, lm.upper_lip, t) ||
            !detail::landmark_valid(s, lm.lower_lip, t))
            continue;
        out[t] = std::hypot(s.x[lm.upper_lip][t] - s.x[lm.lower_lip][t],
                            s.y[lm.upper_lip][t] - s.y[lm.lower_lip][t]);
    }
    return out;
}

struct PupilDisplacement {
    Series x;    // mean across eyes of the per-eye offset components
    Series y;
    Series mag;  // mean across eyes of per-eye offset norms, not ||(x,y)||
};

inline PupilDisplacement pupil_displacement(const KeypointSeries& s,
                                            const FeatureLandmarks& lm = {}) {
    PupilDisplacement out;
    out.x.assign(s.length, kMissing);
    out.y.assign(s.length, kMissing);
    out.mag.assign(s.length, kMissing);
    for (std::size_t t = 0; t < s.length; ++t) {
        if (!detail::all_valid(s, lm.left_eye_contour, t) ||
            !detail::all_valid(s, lm.right_eye_contour, t) ||
            !detail::landmark_valid(s, lm.left_pupil, t) ||
            !detail::landmark_valid(s, lm.right_pupil, t))
            continue;
        const Vec2 lc = detail::centroid_at(s, lm.left_eye_contour, t);
        const Vec2 rc = detail::centroid_at(s, lm.right_eye_contour, t);
        const double lx = s.x[lm.left_pupil][t] - lc.x;
        const double ly = s.y[lm.left_pupil][t] - lc.y;
        const double rx = s.x[lm.right_pupil][t] - rc.x;
        const double ry = s.y[lm.right_pupil][t] - rc.y;
        out.x[t] = 0.5 * (lx + rx);
        out.y[t] = 0.5 * (ly + ry);
        out.mag[t] = 0.5 * (std::hypot(lx, ly) + std::hypot(rx, ry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kinematic derivatives: forward differences scaled by fps, with the final
// sample(s) replicated so all three levels share the value timeline. Applied
// per contiguous valid segment; missing samples stay missing.
// ---------------------------------------------------------------------------

struct DerivativeLevels {
    Series value;
    Series velocity;      // units per second
    Series acceleration;  // units per second squared
};

inline DerivativeLevels derivatives(const Series& x, double fps) {
    if (fps <= 0.0) throw InvalidParams("fps must be positive");
    const std::size_t n = x.size();
    DerivativeLevels d;
    d.value = x;
    d.velocity.assign(n, kMissing);
    d.acceleration.assign(n, kMissing);

    std::size_t t = 0;
    while (t < n) {
        if (is_missing(x[t])) {
            ++t;
            continue;
        }
        std::size_t end = t;
        while (end < n && !is_missing(x[end])) ++end;
        const std::size_t len = end - t;
        if (len >= 2) {
            for (std::size_t i = t; i + 1 < end; ++i)
                d.velocity[i] = (x[i + 1] - x[i]) * fps;
            d.velocity[end - 1] = d.velocity[end - 2];
        }
        if (len >= 3) {
            for (std::size_t i = t; i + 2 < end; ++i)
                d.acceleration[i] =
                    (x[i + 2] - 2.0 * x[i + 1] + x[i]) * fps * fps;
            d.acceleration[end - 2] = d.acceleration[end - 3];
            d.acceleration[end - 1] = d.acceleration[end - 3];
        }
        t = end;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Sliding windows.
// ---------------------------------------------------------------------------

struct WindowSpec {
    double length_s = 60.0;
    double overlap = 0.5;
    double fps = 60.0;

    std::size_t length_samples() const {
        const double ls = length_s * fps;
        const double rounded = std::round(ls);
        if (std::abs(ls - rounded) > 1e-9 || rounded < 1.0)
            throw InvalidParams("window length_s * fps must be a positive integer");
        return static_cast<std::size_t>(rounded);
    }

    std::size_t hop_samples() const {
        if (overlap < 0.0 || overlap >= 1.0)
            throw InvalidParams("overlap must satisfy 0 <= overlap < 1");
        const double h = static_cast<double>(length_samples()) * (1.0 - overlap);
        const double rounded = std::round(h);
        if (std::abs(h - rounded) > 1e-9 || rounded < 1.0)
            throw InvalidParams("window hop must be a positive integer");
        return static_cast<std::size_t>(rounded);
    }
};

struct Window {
    std::size_t index = 0;  // position in the full window grid
    std::size_t start = 0;
    std::size_t length = 0;
};

// All grid positions, regardless of missing data.
inline std::vector<Window> window_grid(std::size_t n, const WindowSpec& spec) {
    const std::size_t len = spec.length_samples();
    const std::size_t hop = spec.hop_samples();
    if (n < len) throw SeriesTooShort("series shorter than one window");
    std::vector<Window> out;
    for (std::size_t start = 0, idx = 0; start + len <= n; start += hop, ++idx)
        out.push_back({idx, start, len});
    return out;
}

// Grid positions whose samples are all valid; windows containing any missing
// value are excluded.
inline std::vector<Window> window(const Series& x, const WindowSpec& spec) {
    std::vector<Window> out;
    for (const Window& w : window_grid(x.size(), spec)) {
        bool ok = true;
        for (std::size_t i = w.start; i < w.start + w.length; ++i)
            if (is_missing(x[i])) {
                ok = false;
                break;
            }
        if (ok) out.push_back(w);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Channel set and feature-matrix assembly.
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& channel_names() {
    static const std::vector<std::string> names = {
        "blink",    "mouth", "pupil_x", "pupil_y", "pupil_mag", "tx",
        "ty",       "t_mag", "rotation", "sx",     "sy",        "head_motion_mag"};
    return names;
}

inline const std::array<std::string, 3>& deriv_names() {
    static const std::array<std::string, 3> names = {"value", "velocity",
                                                     "acceleration"};
    return names;
}

struct ChannelSet {
    std::vector<std::pair<std::string, Series>> channels;  // fixed order

    const Series& at(const std::string& name) const {
        for (const auto& [n, s] : channels)
            if (n == name) return s;
        throw InvalidParams("unknown channel " + name);
    }
};

inline ChannelSet compute_channels(const AlignedSeries& aligned,
                                   const FeatureLandmarks& lm = {}) {
    const KeypointSeries& s = aligned.landmarks;
    const HeadChannels head = head_channels(aligned.poses);
    const PupilDisplacement pupil = pupil_displacement(s, lm);
    ChannelSet cs;
    cs.channels = {
        {"blink", blink_aperture(s, lm)},
        {"mouth", mouth_aperture(s, lm)},
        {"pupil_x", pupil.x},
        {"pupil_y", pupil.y},
        {"pupil_mag", pupil.mag},
        {"tx", head.translation_x},
        {"ty", head.translation_y},
        {"t_mag", head.translation_mag},
        {"rotation", head.rotation},
        {"sx", head.scale_x},
        {"sy", head.scale_y},
        {"head_motion_mag", head.head_motion_mag},
    };
    return cs;
}

// Canonical kinematic column grammar: <channel>__<deriv>__<stat>.
inline std::vector<std::string> kinematic_column_names() {
    std::vector<std::string> cols;
    for (const auto& ch : channel_names())
        for (const auto& dv : deriv_names())
            for (const auto& st : stat_names())
                cols.push_back(ch + "__" + dv + "__" + st);
    return cols;
}

struct WindowFeatures {
    std::size_t window_index = 0;
    std::size_t start = 0;
    std::vector<double> values;  // kinematic_column_names() order
};

// One feature row per window of the grid that is fully valid across every
// channel and derivative level; windows touching any missing sample in any
// channel are dropped as a whole.
inline std::vector<WindowFeatures> kinematic_features(const ChannelSet& cs,
                                                      const WindowSpec& spec) {
    if (cs.channels.empty()) throw EmptyInput("no channels");
    const std::size_t n = cs.channels.front().second.size();
    for (const auto& [name, s] : cs.channels)
        if (s.size() != n)
            throw InvalidParams("channel " + name + " length mismatch");

    std::vector<DerivativeLevels> levels;
    levels.reserve(cs.channels.size());
    for (const auto& [name, s] : cs.channels)
        levels.push_back(derivatives(s, spec.fps));

    std::vector<WindowFeatures> rows;
    for (const Window& w : window_grid(n, spec)) {
        bool ok = true;
        for (const auto& lv : levels) {
            for (std::size_t i = w.start; ok && i < w.start + w.length; ++i)
                if (is_missing(lv.value[i]) || is_missing(lv.velocity[i]) ||
                    is_missing(lv.acceleration[i]))
                    ok = false;
            if (!ok) break;
        }
        if (!ok) continue;
        WindowFeatures row;
        row.window_index = w.index;
        row.start = w.start;
        row.values.reserve(levels.size() * 27);
        for (const auto& lv : levels) {
            for (const Series* s : {&lv.value, &lv.velocity, &lv.acceleration}) {
                const SummaryStats st = summarize(s->data() + w.start, w.length);
                for (double v : st.as_array()) row.values.push_back(v);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace facedyn
