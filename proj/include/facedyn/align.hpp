// Landmark templates and per-frame Procrustes superimposition. The fitted
// transform maps frame coordinates onto the template (center -> rotate ->
// scale -> translate); its parameters are the head-pose channels.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/csv.hpp"
#include "facedyn/keypoints.hpp"

namespace facedyn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline constexpr std::array<int, 4> kDefaultTemplateIds = {30, 31, 37, 46};

struct AlignTemplate {
    std::array<int, 4> ids = kDefaultTemplateIds;
    std::array<Vec2, 4> coords{};
    Vec2 centroid{};
};

struct HeadPose {
    double tx = 0.0;
    double ty = 0.0;
    double theta = 0.0;  // radians, (-pi, pi]
    double sx = 1.0;
    double sy = 1.0;

    bool missing() const { return is_missing(tx); }

    static HeadPose missing_pose() {
        return {kMissing, kMissing, kMissing, kMissing, kMissing};
    }
};

// Mean of each reference landmark over all non-missing frames of every series
// passed in. Global scope pools all participants; per-participant scope is
// the same call on one participant's series.
inline AlignTemplate build_template(const std::vector<const KeypointSeries*>& all,
                                    const std::array<int, 4>& ids = kDefaultTemplateIds) {
    AlignTemplate tmpl;
    tmpl.ids = ids;
    for (int k = 0; k < 4; ++k) {
        const int id = ids[k];
        if (id < 0 || id >= kFaceLandmarks)
            throw InvalidParams("template landmark id " + std::to_string(id) +
                                " outside 0..69");
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (const auto* s : all) {
            for (std::size_t t = 0; t < s->length; ++t) {
                if (is_missing(s->x[id][t]) || is_missing(s->y[id][t])) continue;
                sx += s->x[id][t];
                sy += s->y[id][t];
                ++n;
            }
        }
        if (n == 0)
            throw NoValidSamples("no valid samples for template landmark " +
                                 std::to_string(id));
        tmpl.coords[k] = {sx / static_cast<double>(n), sy / static_cast<double>(n)};
    }
    tmpl.centroid = {0.0, 0.0};
    for (const auto& c : tmpl.coords) {
        tmpl.centroid.x += c.x / 4.0;
        tmpl.centroid.y += c.y / 4.0;
    }
    return tmpl;
}

namespace detail {

inline void check_not_degenerate(const std::array<Vec2, 4>& centered) {
    // Covariance of the centered reference points; collinear or coincident
    // configurations leave the rotation unconstrained.
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (const auto& p : centered) {
        cxx += p.x * p.x;
        cxy += p.x * p.y;
        cyy += p.y * p.y;
    }
    const double tr = cxx + cyy;
    const double det = cxx * cyy - cxy * cxy;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    const double lmin = tr / 2.0 - disc;
    const double lmax = tr / 2.0 + disc;
    if (!(lmax > 0.0) || lmin <= 1e-9 * lmax)
        throw DegenerateConfiguration(
            "reference points are collinear or coincident");
}

}  // namespace detail

struct ProcrustesFit {
    HeadPose pose;
    double residual = 0.0;  // sum of squared distances at the reference points

    Vec2 frame_centroid{};

    Vec2 apply(const Vec2& p) const {
        const double c = std::cos(pose.theta);
        const double s = std::sin(pose.theta);
        const double px = p.x - frame_centroid.x;
        const double py = p.y - frame_centroid.y;
        const double rx = c * px - s * py;
        const double ry = s * px + c * py;
        return {pose.sx * rx + frame_centroid.x + pose.tx,
                pose.sy * ry + frame_centroid.y + pose.ty};
    }
};

// Least-squares fit of translation, rotation and per-axis scale taking the
// frame's reference points onto the template. Translation comes from
// centroid matching; rotation and scales alternate (closed-form orthogonal
// Procrustes for the rotation, exact per-axis regression for the scales)
// until the parameter change drops below 1e-10 or 100 iterations.
inline ProcrustesFit procrustes_fit(const std::array<Vec2, 4>& frame_pts,
                                    const AlignTemplate& tmpl) {
    for (const auto& p : frame_pts)
        if (is_missing(p.x) || is_missing(p.y))
            throw InvalidParams("procrustes_fit requires valid reference points");

    Vec2 mu_f{0.0, 0.0};
    for (const auto& p : frame_pts) {
        mu_f.x += p.x / 4.0;
        mu_f.y += p.y / 4.0;
    }
    std::array<Vec2, 4> x{};  // centered frame
    std::array<Vec2, 4> y{};  // centered template
    for (int i = 0; i < 4; ++i) {
        x[i] = {frame_pts[i].x - mu_f.x, frame_pts[i].y - mu_f.y};
        y[i] = {tmpl.coords[i].x - tmpl.centroid.x,
                tmpl.coords[i].y - tmpl.centroid.y};
    }
    detail::check_not_degenerate(x);
    detail::check_not_degenerate(y);

    double theta = 0.0, sx = 1.0, sy = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
        // Rotation: orthogonal Procrustes of x against the de-scaled template.
        double a = 0.0, b = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double yx = y[i].x / sx;
            const double yy = y[i].y / sy;
            a += yx * x[i].x + yy * x[i].y;
            b += yy * x[i].x - yx * x[i].y;
        }
        const double new_theta = std::atan2(b, a);

        // Per-axis scales: exact conditional minimizers given the rotation.
        const double c = std::cos(new_theta);
        const double s = std::sin(new_theta);
        double num_x = 0.0, den_x = 0.0, num_y = 0.0, den_y = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double u = c * x[i].x - s * x[i].y;
            const double v = s * x[i].x + c * x[i].y;
            num_x += y[i].x * u;
            den_x += u * u;
            num_y += y[i].y * v;
            den_y += v * v;
        }
        const double new_sx = std::max(1e-12, num_x / den_x);
        const double new_sy = std::max(1e-12, num_y / den_y);

        const double change = std::max({std::abs(new_theta - theta),
                                        std::abs(new_sx - sx),
                                        std::abs(new_sy - sy)});
        theta = new_theta;
        sx = new_sx;
        sy = new_sy;
        if (change < 1e-10) break;
    }

    ProcrustesFit fit;
    fit.frame_centroid = mu_f;
    fit.pose.tx = tmpl.centroid.x - mu_f.x;
    fit.pose.ty = tmpl.centroid.y - mu_f.y;
    fit.pose.theta = theta;
    fit.pose.sx = sx;
    fit.pose.sy = sy;
    fit.residual = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Vec2 m = fit.apply(frame_pts[i]);
        const double dx = m.x - tmpl.coords[i].x;
        const double dy = m.y - tmpl.coords[i].y;
        fit.residual += dx * dx + dy * dy;
    }
    return fit;
}

struct AlignedSeries {
    KeypointSeries landmarks;         // all 70 landmarks mapped through T
    std::vector<HeadPose> poses;      // one per frame, missing where skipped
    std::vector<std::size_t> skipped;  // frames with missing/degenerate refs
};

// Fits every frame of a preprocessed series against the template. Frames
// whose reference points are missing or degenerate are flagged and their
// pose/aligned landmarks stay missing.
inline AlignedSeries align_series(const KeypointSeries& s,
                                  const AlignTemplate& tmpl) {
    AlignedSeries out;
    out.landmarks = s;
    out.poses.assign(s.length, HeadPose::missing_pose());
    for (std::size_t t = 0; t < s.length; ++t) {
        std::array<Vec2, 4> ref{};
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
            const int id = tmpl.ids[k];
            ref[k] = {s.x[id][t], s.y[id][t]};
            if (is_missing(ref[k].x) || is_missing(ref[k].y)) ok = false;
        }
        if (!ok) {
            out.skipped.push_back(t);
            for (int l = 0; l < kFaceLandmarks; ++l) {
                out.landmarks.x[l][t] = kMissing;
                out.landmarks.y[l][t] = kMissing;
            }
            continue;
        }
        ProcrustesFit fit;
        try {
            fit = procrustes_fit(ref, tmpl);
        } catch (const DegenerateConfiguration&) {
            out.skipped.push_back(t);
            for (int l = 0; l < kFaceLandmarks; ++l) {
                out.landmarks.x[l][t] = kMissing;
                out.landmarks.y[l][t] = kMissing;
            }
            continue;
        }
        out.poses[t] = fit.pose;
        for (int l = 0; l < kFaceLandmarks; ++l) {
            if (is_missing(s.x[l][t]) || is_missing(s.y[l][t])) continue;
            const Vec2 m = fit.apply({s.x[l][t], s.y[l][t]});
            out.landmarks.x[l][t] = m.x;
            out.landmarks.y[l][t] = m.y;
        }
    }
    return out;
}

struct HeadChannels {
    Series translation_x;
    Series translation_y;
    Series translation_mag;
    Series rotation;
    Series scale_x;
    Series scale_y;
    Series head_motion_mag;  // sqrt(tx^2 + ty^2 + (sx-1)^2 + (sy-1)^2)
};

inline HeadChannels head_channels(const std::vector<HeadPose>& poses) {
    if (poses.empty()) throw EmptyInput("head_channels needs at least one pose");
    HeadChannels ch;
    const std::size_t n = poses.size();
    ch.translation_x.resize(n);
    ch.translation_y.resize(n);
    ch.translation_mag.resize(n);
    ch.rotation.resize(n);
    ch.scale_x.resize(n);
    ch.scale_y.resize(n);
    ch.head_motion_mag.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const HeadPose& p = poses[t];
        if (p.missing()) {
            ch.translation_x[t] = ch.translation_y[t] = ch.translation_mag[t] =
                ch.rotation[t] = ch.scale_x[t] = ch.scale_y[t] =
                    ch.head_motion_mag[t] = kMissing;
            continue;
        }
        ch.translation_x[t] = p.tx;
        ch.translation_y[t] = p.ty;
        ch.translation_mag[t] = std::hypot(p.tx, p.ty);
        ch.rotation[t] = p.theta;
        ch.scale_x[t] = p.sx;
        ch.scale_y[t] = p.sy;
        ch.head_motion_mag[t] = std::sqrt(p.tx * p.tx + p.ty * p.ty +
                                          (p.sx - 1.0) * (p.sx - 1.0) +
                                          (p.sy - 1.0) * (p.sy - 1.0));
    }
    return ch;
}

// ---------------------------------------------------------------------------
// Small text format for template reuse: one "id x y" line per landmark.
// ---------------------------------------------------------------------------

inline void save_template(const AlignTemplate& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (int k = 0; k < 4; ++k)
        out << t.ids[k] << ' ' << csv::format_number(t.coords[k].x) << ' '
            << csv::format_number(t.coords[k].y) << '\n';
}

inline AlignTemplate load_template(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    AlignTemplate t;
    for (int k = 0; k < 4; ++k) {
        int id;
        double x, y;
        if (!(in >> id >> x >> y))
            throw MalformedRecord(path + ": expected 4 'id x y' lines");
        t.ids[k] = id;
        t.coords[k] = {x, y};
    }
    t.centroid = {0.0, 0.0};
    for (const auto& c : t.coords) {
        t.centroid.x += c.x / 4.0;
        t.centroid.y += c.y / 4.0;
    }
    return t;
}

}  // namespace facedyn
