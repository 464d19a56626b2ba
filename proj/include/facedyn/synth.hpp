// Synthetic fixtures: parametric test signals, a channel-level participant
// dataset generator with controllable idiosyncrasy, a keypoint-level face
// scene generator, an event-log generator, and a brute-force RQA oracle that
// recomputes every measure by explicit run enumeration.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/keypoints.hpp"
#include "facedyn/ml.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/rqa.hpp"
#include "facedyn/taskperf.hpp"

namespace facedyn::synth {

// ---------------------------------------------------------------------------
// Parametric signals.
// ---------------------------------------------------------------------------

enum class SignalKind { sine, sum_of_sines, ar1, white_noise, switching };

struct RegimeSpec {
    SignalKind kind = SignalKind::sine;
    double amplitude = 1.0;
    std::vector<double> frequencies = {1.0};  // Hz; sine uses the first
    double ar_coeff = 0.5;
    double noise_sd = 1.0;
    std::size_t switch_every = 0;  // switching: block length, 0 = n/4
    std::uint64_t seed = 0;
};

inline Series gen_signal(const RegimeSpec& spec, std::size_t n, double fps) {
    if (n < 1) throw InvalidParams("gen_signal needs n >= 1");
    if (fps <= 0.0) throw InvalidParams("fps must be positive");
    for (double f : spec.frequencies)
        if (f <= 0.0 || f >= fps / 2.0)
            throw InvalidParams("frequency must lie in (0, fps/2)");
    if (std::abs(spec.ar_coeff) >= 1.0)
        throw InvalidParams("|ar coefficient| must be < 1");
    if (spec.noise_sd < 0.0) throw InvalidParams("noise_sd must be >= 0");

    Rng rng(spec.seed);
    Series x(n, 0.0);
    constexpr double two_pi = 6.283185307179586476925286766559;
    switch (spec.kind) {
        case SignalKind::sine: {
            const double f = spec.frequencies.at(0);
            for (std::size_t t = 0; t < n; ++t)
                x[t] = spec.amplitude *
                       std::sin(two_pi * f * static_cast<double>(t) / fps);
            break;
        }
        case SignalKind::sum_of_sines: {
            for (std::size_t t = 0; t < n; ++t) {
                double v = 0.0;
                for (double f : spec.frequencies)
                    v += spec.amplitude *
                         std::sin(two_pi * f * static_cast<double>(t) / fps);
                x[t] = v;
            }
            break;
        }
        case SignalKind::ar1: {
            double prev = rng.normal() * spec.noise_sd;
            x[0] = prev;
            for (std::size_t t = 1; t < n; ++t) {
                prev = spec.ar_coeff * prev + rng.normal() * spec.noise_sd;
                x[t] = prev;
            }
            break;
        }
        case SignalKind::white_noise: {
            for (std::size_t t = 0; t < n; ++t)
                x[t] = rng.normal() * spec.noise_sd;
            break;
        }
        case SignalKind::switching: {
            const std::size_t block =
                spec.switch_every > 0 ? spec.switch_every
                                      : std::max<std::size_t>(1, n / 4);
            const double f = spec.frequencies.at(0);
            for (std::size_t t = 0; t < n; ++t) {
                const bool tonal = ((t / block) % 2) == 0;
                x[t] = tonal ? spec.amplitude *
                                   std::sin(two_pi * f *
                                            static_cast<double>(t) / fps)
                             : rng.normal() * spec.noise_sd;
            }
            break;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Channel-level participant dataset. Three latent load regimes set class
// means on the informative features; idiosyncrasy adds participant-specific
// offsets and sign flips so cross-participant transfer degrades while
// within-participant splits stay learnable.
// ---------------------------------------------------------------------------

struct SynthDatasetConfig {
    int n_participants = 12;
    int windows_per_condition = 30;
    double idiosyncrasy = 0.0;  // 0 = shared encoding; ~2 = heavy flips/offsets
    int n_features = 20;
    int n_informative = 10;
    double class_sep = 1.0;
    double noise_sd = 0.3;
    int baseline_windows_per_condition = 0;
    std::uint64_t seed = 1234;

    void validate() const {
        if (n_participants < 1 || windows_per_condition < 1)
            throw InvalidParams("participants and windows must be positive");
        if (n_features < 1 || n_informative < 0 ||
            n_informative > n_features)
            throw InvalidParams("bad feature counts");
        if (idiosyncrasy < 0.0 || noise_sd < 0.0 || class_sep < 0.0)
            throw InvalidParams("negative magnitude parameter");
    }
};

inline FeatureMatrix gen_participant_dataset(const SynthDatasetConfig& cfg) {
    cfg.validate();
    Rng master(cfg.seed);

    // Class mean pattern per informative feature: a permutation of
    // {-1, 0, +1} * class_sep, fixed across participants.
    std::vector<std::array<double, 3>> pattern(cfg.n_informative);
    for (int j = 0; j < cfg.n_informative; ++j) {
        std::vector<double> p = {-cfg.class_sep, 0.0, cfg.class_sep};
        Rng r = master.fork(10 + static_cast<std::uint64_t>(j));
        r.shuffle(p);
        pattern[j] = {p[0], p[1], p[2]};
    }

    FeatureMatrix M;
    for (int j = 0; j < cfg.n_features; ++j) {
        std::string name = "feat_" + std::to_string(j);
        if (name.size() < 7) name.insert(5, "0");
        M.columns.push_back(name);
    }

    const double flip_prob = std::min(0.5, cfg.idiosyncrasy / 4.0);
    for (int p = 0; p < cfg.n_participants; ++p) {
        std::string pid = "P" + std::to_string(p + 1);
        if (pid.size() < 3) pid.insert(1, "0");
        Rng prng = master.fork(1000 + static_cast<std::uint64_t>(p));
        std::vector<double> offset(cfg.n_features);
        std::vector<double> sign(cfg.n_features, 1.0);
        for (int j = 0; j < cfg.n_features; ++j) {
            offset[j] = cfg.idiosyncrasy * prng.uniform(-2.0, 2.0);
            if (prng.uniform() < flip_prob) sign[j] = -1.0;
        }
        auto emit = [&](const std::string& session, int windows) {
            for (int c = 0; c < kNumConditions; ++c) {
                for (int w = 0; w < windows; ++w) {
                    std::vector<double> v(cfg.n_features);
                    for (int j = 0; j < cfg.n_features; ++j) {
                        const double mean =
                            j < cfg.n_informative ? sign[j] * pattern[j][c]
                                                  : 0.0;
                        v[j] = mean + offset[j] +
                               prng.normal() * cfg.noise_sd;
                    }
                    FeatureRowMeta meta;
                    meta.participant = pid;
                    meta.session = session;
                    meta.condition = c;
                    meta.window_index = static_cast<std::size_t>(w);
                    M.add_row(std::move(meta), v);
                }
            }
        };
        if (cfg.baseline_windows_per_condition > 0)
            emit("baseline", cfg.baseline_windows_per_condition);
        emit("experimental", cfg.windows_per_condition);
    }
    return M;
}

// ---------------------------------------------------------------------------
// Brute-force RQA oracle. Builds its own thresholded matrix and derives all
// measures by walking every diagonal and vertical run explicitly; no
// histograms, no shared metric code. Distance sums follow the same per-row
// order as production so the derived epsilon is bit-identical (a numeric
// detail, not an algorithmic shortcut).
// ---------------------------------------------------------------------------

inline RqaMetrics brute_force_rqa(const Trajectory& a, const Trajectory* b,
                                  const RqaConfig& cfg) {
    const bool auto_mode = (b == nullptr);
    const Trajectory& tb = auto_mode ? a : *b;
    if (a.count == 0 || tb.count == 0)
        throw EmptyTrajectory("brute_force_rqa needs non-empty trajectories");
    if (a.count > 2000 || tb.count > 2000)
        throw TooLarge("brute_force_rqa limited to N <= 2000");
    const std::size_t na = a.count, nb = tb.count;
    const auto theiler =
        auto_mode ? static_cast<std::size_t>(cfg.theiler) : std::size_t{0};

    // Band = offsets |i-j| < theiler, matching the RR example convention
    // where theiler=2 keeps pairs with |i-j| >= 2.
    auto banded = [&](std::size_t i, std::size_t j) {
        if (!auto_mode) return false;
        const std::size_t d = i > j ? i - j : j - i;
        return d < theiler;
    };
    auto dist = [&](std::size_t i, std::size_t j) {
        double d2 = 0.0;
        for (int k = 0; k < a.m; ++k) {
            const double diff = a.point(i)[k] - tb.point(j)[k];
            d2 += diff * diff;
        }
        return std::sqrt(d2);
    };

    double total = 0.0;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < na; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            if (banded(i, j)) continue;
            row += dist(i, j);
            ++valid;
        }
        total += row;
    }
    if (valid == 0) throw EmptyTrajectory("Theiler band covers the matrix");
    const double eps = cfg.radius_frac * (total / static_cast<double>(valid));

    std::vector<std::vector<bool>> R(na, std::vector<bool>(nb, false));
    std::size_t recurrent = 0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            if (banded(i, j)) continue;
            if (dist(i, j) <= eps) {
                R[i][j] = true;
                ++recurrent;
            }
        }

    RqaMetrics out;
    out.short_window = std::min(na, nb) < cfg.stability_min_samples;
    out.rr = static_cast<double>(recurrent) / static_cast<double>(valid);
    if (recurrent == 0) {
        out.no_recurrent_points = true;
        out.divergence_defined = false;
        return out;
    }

    // Diagonal runs: a run starts where the up-left neighbour is absent.
    std::vector<std::size_t> dlines;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            if (!R[i][j]) continue;
            if (i > 0 && j > 0 && R[i - 1][j - 1]) continue;
            std::size_t len = 0;
            for (std::size_t ii = i, jj = j; ii < na && jj < nb && R[ii][jj];
                 ++ii, ++jj)
                ++len;
            if (len >= static_cast<std::size_t>(cfg.l_min))
                dlines.push_back(len);
        }

    std::vector<std::size_t> vlines;
    for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t i = 0; i < na; ++i) {
            if (!R[i][j]) continue;
            if (i > 0 && R[i - 1][j]) continue;
            std::size_t len = 0;
            for (std::size_t ii = i; ii < na && R[ii][j]; ++ii) ++len;
            if (len >= static_cast<std::size_t>(cfg.v_min))
                vlines.push_back(len);
        }

    std::size_t dpoints = 0, dmax = 0;
    for (std::size_t l : dlines) {
        dpoints += l;
        dmax = std::max(dmax, l);
    }
    out.det = static_cast<double>(dpoints) / static_cast<double>(recurrent);
    if (!dlines.empty()) {
        const double nl = static_cast<double>(dlines.size());
        out.l_mean = static_cast<double>(dpoints) / nl;
        double ss = 0.0;
        for (std::size_t l : dlines) {
            const double d = static_cast<double>(l) - out.l_mean;
            ss += d * d;
        }
        out.l_sd = std::sqrt(ss / nl);
        out.lmax = static_cast<double>(dmax);
        // Entropy from per-length probabilities, each length counted once.
        std::set<std::size_t> distinct(dlines.begin(), dlines.end());
        double ent = 0.0;
        for (std::size_t len : distinct) {
            std::size_t cnt = 0;
            for (std::size_t l : dlines)
                if (l == len) ++cnt;
            const double p = static_cast<double>(cnt) / nl;
            ent -= p * std::log2(p);
        }
        out.entropy = ent;
        const double max_ent =
            cfg.complexity == ComplexityMode::range
                ? std::log2(static_cast<double>(
                      dmax - static_cast<std::size_t>(cfg.l_min) + 1))
                : std::log2(static_cast<double>(distinct.size()));
        out.complexity = max_ent - ent;
        out.divergence = 1.0 / static_cast<double>(dmax);
    } else {
        out.divergence_defined = false;
    }

    std::size_t vpoints = 0, vmax = 0;
    for (std::size_t l : vlines) {
        vpoints += l;
        vmax = std::max(vmax, l);
    }
    out.lam = static_cast<double>(vpoints) / static_cast<double>(recurrent);
    if (!vlines.empty()) {
        out.tt = static_cast<double>(vpoints) /
                 static_cast<double>(vlines.size());
        out.vmax = static_cast<double>(vmax);
    }

    // Trend by direct per-diagonal cell counting.
    const std::size_t n = std::min(na, nb);
    const std::size_t d_lo = theiler;
    const std::size_t d_hi =
        n > 2 * static_cast<std::size_t>(cfg.l_min)
            ? n - 2 * static_cast<std::size_t>(cfg.l_min)
            : 0;
    if (d_hi >= d_lo + 1) {
        std::vector<double> xs, ys;
        for (std::size_t d = d_lo; d <= d_hi; ++d) {
            std::size_t rec = 0, cells = 0;
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = 0; j < nb; ++j) {
                    const std::size_t dd = i > j ? i - j : j - i;
                    if (dd != d) continue;
                    ++cells;
                    if (R[i][j]) ++rec;
                }
            if (cells == 0) continue;
            xs.push_back(static_cast<double>(d));
            ys.push_back(static_cast<double>(rec) /
                         static_cast<double>(cells));
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double cnt = static_cast<double>(xs.size());
        const double denom = cnt * sxx - sx * sx;
        if (denom > 0.0) out.trend = (cnt * sxy - sx * sy) / denom;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Keypoint-level face scene: a fixed synthetic face layout driven by smooth
// rigid-body motion (translation, rotation, anisotropic scale), eyelid and
// mouth oscillation, and pupil drift. Exercises ingest -> align -> features
// end to end.
// ---------------------------------------------------------------------------

struct FaceSceneConfig {
    std::size_t n_frames = 3600;
    double fps = 60.0;
    double center_x = 1280.0;
    double center_y = 720.0;
    double motion_amp = 30.0;   // px translation swing
    double rot_amp = 0.04;      // radians
    double scale_amp = 0.02;    // fractional anisotropic scale swing
    double blink_amp = 4.0;     // px eyelid travel
    double blink_freq = 0.25;   // Hz
    double mouth_amp = 6.0;
    double mouth_freq = 0.15;
    double pupil_amp = 3.0;
    double pupil_freq = 0.4;
    double jitter_sd = 0.0;     // per-landmark Gaussian noise, px
    double conf_drop_prob = 0.0;  // chance a frame is low confidence
    std::uint64_t seed = 7;
};

// Base landmark layout in face-local coordinates (y grows downward).
inline std::array<Vec2, kFaceLandmarks> base_face_layout() {
    std::array<Vec2, kFaceLandmarks> pts{};
    // Outline and filler points on an ellipse, deterministic by id.
    for (int id = 0; id < kFaceLandmarks; ++id) {
        const double a = 6.283185307179586 * static_cast<double>(id) / 70.0;
        pts[id] = {150.0 * std::cos(a), 190.0 * std::sin(a)};
    }
    // Nose bridge/tip (template references 30, 31).
    pts[27] = {0.0, -30.0};
    pts[28] = {0.0, -12.0};
    pts[29] = {0.0, 6.0};
    pts[30] = {0.0, 24.0};
    pts[31] = {-14.0, 34.0};
    pts[32] = {-7.0, 38.0};
    pts[33] = {0.0, 40.0};
    pts[34] = {7.0, 38.0};
    pts[35] = {14.0, 34.0};
    // Left eye contour 37..42 around (-55, -40); 38/39 upper, 41/42 lower.
    pts[36] = {-75.0, -40.0};
    pts[37] = {-67.0, -40.0};
    pts[38] = {-61.0, -46.0};
    pts[39] = {-49.0, -46.0};
    pts[40] = {-43.0, -40.0};
    pts[41] = {-49.0, -34.0};
    pts[42] = {-61.0, -34.0};
    // Right eye contour 43..48 around (+55, -40); 44/45 upper, 47/48 lower.
    pts[43] = {43.0, -40.0};
    pts[44] = {49.0, -46.0};
    pts[45] = {61.0, -46.0};
    pts[46] = {67.0, -40.0};
    pts[47] = {61.0, -34.0};
    pts[48] = {49.0, -34.0};
    // Mouth: 63 upper lip, 67 lower lip.
    pts[60] = {-22.0, 70.0};
    pts[61] = {-10.0, 64.0};
    pts[62] = {0.0, 62.0};
    pts[63] = {0.0, 66.0};
    pts[64] = {10.0, 64.0};
    pts[65] = {22.0, 70.0};
    pts[66] = {0.0, 82.0};
    pts[67] = {0.0, 76.0};
    // Pupils 68 (left), 69 (right) at the contour centroids.
    pts[68] = {-55.0, -40.0};
    pts[69] = {55.0, -40.0};
    return pts;
}

inline std::vector<FrameKeypoints> gen_face_frames(const FaceSceneConfig& cfg) {
    if (cfg.n_frames < 1) throw InvalidParams("n_frames must be >= 1");
    const auto base = base_face_layout();
    Rng rng(cfg.seed);
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::vector<FrameKeypoints> frames;
    frames.reserve(cfg.n_frames);
    for (std::size_t t = 0; t < cfg.n_frames; ++t) {
        const double ts = static_cast<double>(t) / cfg.fps;
        const double tx = cfg.motion_amp * std::sin(two_pi * 0.05 * ts);
        const double ty = cfg.motion_amp * 0.6 * std::sin(two_pi * 0.08 * ts + 1.0);
        const double th = cfg.rot_amp * std::sin(two_pi * 0.06 * ts + 0.5);
        const double sx = 1.0 + cfg.scale_amp * std::sin(two_pi * 0.03 * ts);
        const double sy = 1.0 + cfg.scale_amp * std::sin(two_pi * 0.04 * ts + 2.0);
        const double blink =
            cfg.blink_amp * 0.5 *
            (1.0 + std::sin(two_pi * cfg.blink_freq * ts));
        const double mouth =
            cfg.mouth_amp * 0.5 *
            (1.0 + std::sin(two_pi * cfg.mouth_freq * ts));
        const double px = cfg.pupil_amp * std::sin(two_pi * cfg.pupil_freq * ts);
        const double py =
            cfg.pupil_amp * 0.5 * std::sin(two_pi * cfg.pupil_freq * 1.3 * ts);

        const bool dropped = rng.uniform() < cfg.conf_drop_prob;
        FrameKeypoints fk;
        fk.frame_index = static_cast<std::int64_t>(t);
        for (int id = 0; id < kFaceLandmarks; ++id) {
            Vec2 p = base[id];
            // Articulated motion in face-local coordinates.
            if (id == 38 || id == 39 || id == 44 || id == 45) p.y += blink;
            if (id == 67) p.y += mouth;
            if (id == 68 || id == 69) {
                p.x += px;
                p.y += py;
            }
            // Rigid-body pose.
            const double c = std::cos(th), s = std::sin(th);
            const double rx = c * p.x - s * p.y;
            const double ry = s * p.x + c * p.y;
            double gx = cfg.center_x + sx * rx + tx;
            double gy = cfg.center_y + sy * ry + ty;
            if (cfg.jitter_sd > 0.0) {
                gx += rng.normal() * cfg.jitter_sd;
                gy += rng.normal() * cfg.jitter_sd;
            }
            fk.points[id].x = gx;
            fk.points[id].y = gy;
            fk.points[id].confidence = dropped ? 0.1 : 0.9;
        }
        frames.push_back(fk);
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Event-log generator: regular tracking/resman samples plus sysmon signals
// and comms prompts with seeded response behaviour. difficulty in [0,1]
// lowers accuracies and stretches latencies.
// ---------------------------------------------------------------------------

struct EventLogConfig {
    double duration_s = 300.0;
    double sample_period_s = 1.0;
    double sysmon_period_s = 25.0;
    double comms_period_s = 40.0;
    double own_prob = 0.5;  // chance a comms prompt targets the own callsign
    double difficulty = 0.2;
    std::uint64_t seed = 11;
};

inline std::vector<Event> gen_event_log(const EventLogConfig& cfg) {
    if (cfg.duration_s <= 0.0 || cfg.sample_period_s <= 0.0)
        throw InvalidParams("bad event log config");
    if (cfg.difficulty < 0.0 || cfg.difficulty > 1.0)
        throw InvalidParams("difficulty must lie in [0,1]");
    Rng rng(cfg.seed);
    std::vector<Event> events;
    const double p_good = 0.95 - 0.5 * cfg.difficulty;

    for (double t = 0.0; t < cfg.duration_s; t += cfg.sample_period_s) {
        Event tr;
        tr.t = t;
        tr.subtask = Subtask::tracking;
        tr.kind = "sample";
        tr.payload["in_target"] = rng.uniform() < p_good ? 1.0 : 0.0;
        events.push_back(tr);
        Event rm;
        rm.t = t;
        rm.subtask = Subtask::resman;
        rm.kind = "sample";
        rm.payload["a_in"] = rng.uniform() < p_good ? 1.0 : 0.0;
        rm.payload["b_in"] = rng.uniform() < p_good ? 1.0 : 0.0;
        events.push_back(rm);
    }
    // First onsets sit half a period in (capped) so short logs still place
    // signals and prompts inside every analysis window.
    const double sysmon_start = std::min(5.0, 0.5 * cfg.sysmon_period_s);
    const double comms_start = std::min(12.0, 0.5 * cfg.comms_period_s);
    for (double t = sysmon_start; t < cfg.duration_s; t += cfg.sysmon_period_s) {
        Event sig;
        sig.t = t;
        sig.subtask = Subtask::sysmon;
        sig.kind = "signal";
        events.push_back(sig);
        if (rng.uniform() < p_good) {
            Event resp;
            resp.t = t + rng.uniform(0.4, 2.0 + 8.0 * cfg.difficulty);
            resp.subtask = Subtask::sysmon;
            resp.kind = "response";
            if (resp.t < cfg.duration_s) events.push_back(resp);
        }
    }
    for (double t = comms_start; t < cfg.duration_s; t += cfg.comms_period_s) {
        const bool own = rng.uniform() < cfg.own_prob;
        Event pr;
        pr.t = t;
        pr.subtask = Subtask::comms;
        pr.kind = "prompt";
        pr.payload["own"] = own ? 1.0 : 0.0;
        events.push_back(pr);
        const double p_resp = own ? p_good : 0.1 + 0.3 * cfg.difficulty;
        if (rng.uniform() < p_resp) {
            Event resp;
            resp.t = t + rng.uniform(0.8, 3.0 + 10.0 * cfg.difficulty);
            resp.subtask = Subtask::comms;
            resp.kind = "response";
            if (resp.t < cfg.duration_s) events.push_back(resp);
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return events;
}

inline void write_event_log(const std::vector<Event>& events,
                            const std::string& path) {
    csv::Writer w(path);
    w.row({"t", "subtask", "kind", "payload"});
    for (const Event& e : events) {
        std::string payload;
        for (const auto& [k, v] : e.payload) {
            if (!payload.empty()) payload += ';';
            payload += k + "=" + csv::format_number(v);
        }
        w.row({csv::format_number(e.t), subtask_name(e.subtask), e.kind,
               payload});
    }
}

// ---------------------------------------------------------------------------
// On-disk corpus: per participant one baseline recording plus one
// experimental recording per condition, each a keypoint JSONL and a matching
// event log. Condition modulates facial tempo/amplitude and task difficulty.
// ---------------------------------------------------------------------------

struct CorpusConfig {
    std::size_t n_participants = 2;
    double duration_s = 30.0;
    double fps = 60.0;
    std::uint64_t seed = 1;
    double jitter_sd = 0.3;
};

inline std::vector<std::string> write_corpus(const std::string& dir,
                                             const CorpusConfig& cfg) {
    if (cfg.n_participants < 1) throw InvalidParams("need >= 1 participant");
    if (cfg.duration_s <= 0.0 || cfg.fps <= 0.0)
        throw InvalidParams("bad corpus duration/fps");
    std::vector<std::string> written;
    const auto n_frames =
        static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fps));
    for (std::size_t p = 0; p < cfg.n_participants; ++p) {
        char pid[8];
        std::snprintf(pid, sizeof(pid), "P%02zu", p + 1);
        // Session index 0 is baseline; 1..3 map to the three conditions.
        for (int s = 0; s < 4; ++s) {
            const bool baseline = (s == 0);
            const int cond = baseline ? 0 : s - 1;
            const double level = baseline ? 0.0 : 0.25 + 0.25 * cond;

            FaceSceneConfig face;
            face.n_frames = n_frames;
            face.fps = cfg.fps;
            face.motion_amp = 15.0 + 30.0 * level;
            face.rot_amp = 0.02 + 0.04 * level;
            face.blink_freq = 0.2 + 0.3 * level;
            face.mouth_freq = 0.1 + 0.2 * level;
            face.pupil_freq = 0.3 + 0.5 * level;
            face.jitter_sd = cfg.jitter_sd;
            std::uint64_t face_state = cfg.seed + 31 * p + static_cast<std::uint64_t>(s);
            face.seed = splitmix64(face_state);

            const std::string base = std::string(pid) + "__" +
                                     (baseline ? "baseline" : "experimental") +
                                     "__" + condition_names()[cond];
            const std::string face_path = dir + "/" + base + ".face.jsonl";
            write_frames_jsonl(gen_face_frames(face), face_path);
            written.push_back(face_path);

            EventLogConfig ev;
            ev.duration_s = cfg.duration_s;
            ev.difficulty = baseline ? 0.05 : 0.1 + 0.15 * cond;
            ev.sysmon_period_s = std::min(25.0, cfg.duration_s / 5.0);
            ev.comms_period_s = std::min(40.0, cfg.duration_s / 6.0);
            ev.own_prob = 0.9;
            std::uint64_t ev_state = cfg.seed + 131 * p + static_cast<std::uint64_t>(s);
            ev.seed = splitmix64(ev_state);
            const std::string ev_path = dir + "/" + base + ".events.csv";
            write_event_log(gen_event_log(ev), ev_path);
            written.push_back(ev_path);
        }
    }
    return written;
}

}  // namespace facedyn::synth
