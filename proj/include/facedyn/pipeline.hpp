// End-to-end orchestration: ingest -> preprocess -> align -> features ->
// recurrence measures -> task-performance merge -> feature CSV, with a
// per-unit feature cache keyed by the semantic config hash and input hashes.
#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facedyn/align.hpp"
#include "facedyn/common.hpp"
#include "facedyn/config.hpp"
#include "facedyn/csv.hpp"
#include "facedyn/embedding.hpp"
#include "facedyn/features.hpp"
#include "facedyn/keypoints.hpp"
#include "facedyn/ml.hpp"
#include "facedyn/parallel.hpp"
#include "facedyn/preprocess.hpp"
#include "facedyn/rqa.hpp"
#include "facedyn/taskperf.hpp"

namespace facedyn {

namespace fs = std::filesystem;

// One recording: "<participant>__<session>__<condition>.face.jsonl".
struct UnitId {
    std::string participant;
    std::string session;    // baseline | experimental
    int condition = 0;
    std::string base;       // filename without the .face.jsonl suffix
};

inline UnitId parse_unit_filename(const std::string& filename) {
    const std::string suffix = ".face.jsonl";
    if (filename.size() <= suffix.size() ||
        filename.substr(filename.size() - suffix.size()) != suffix)
        throw InvalidParams("expected <p>__<session>__<condition>" + suffix +
                            ", got " + filename);
    UnitId id;
    id.base = filename.substr(0, filename.size() - suffix.size());
    const std::vector<std::string> parts = [&] {
        std::vector<std::string> out;
        std::size_t pos = 0;
        while (true) {
            const std::size_t next = id.base.find("__", pos);
            if (next == std::string::npos) {
                out.push_back(id.base.substr(pos));
                break;
            }
            out.push_back(id.base.substr(pos, next - pos));
            pos = next + 2;
        }
        return out;
    }();
    if (parts.size() != 3)
        throw InvalidParams("filename " + filename +
                            " must have participant__session__condition");
    id.participant = parts[0];
    id.session = parts[1];
    if (id.session != "baseline" && id.session != "experimental")
        throw InvalidParams(filename + ": session must be baseline|experimental");
    id.condition = condition_index(parts[2]);
    return id;
}

inline void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot open " + tmp + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

inline std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    return fnv1a(s.data(), s.size());
}

// Full column list for a run configuration.
inline std::vector<std::string> pipeline_columns(const RunConfig& cfg) {
    std::vector<std::string> cols = kinematic_column_names();
    for (const auto& ch : cfg.rqa_channels)
        for (const auto& m : table_metric_names())
            cols.push_back(ch + "__rqa__" + m);
    for (const auto& m : table_metric_names())
        cols.push_back(cfg.crqa_pair.first + "__" + cfg.crqa_pair.second +
                       "__crqa__" + m);
    if (!cfg.events_dir.empty())
        for (const auto& c : perf_column_names()) cols.push_back(c);
    return cols;
}

namespace detail {

struct UnitRows {
    std::vector<std::size_t> window_indices;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> warnings;
};

// Feature rows for one preprocessed, stabilized recording.
inline UnitRows unit_feature_rows(const KeypointSeries& pre,
                                  const AlignTemplate& tmpl,
                                  const RunConfig& cfg,
                                  const std::vector<Event>* events) {
    UnitRows out;
    AlignedSeries aligned = align_series(pre, tmpl);
    if (cfg.stabilization == StabilizationMode::none)
        aligned.landmarks = pre;  // keep normalized coords; poses retained
    if (!aligned.skipped.empty())
        out.warnings.push_back(std::to_string(aligned.skipped.size()) +
                               " frames lacked valid reference landmarks");

    const ChannelSet channels = compute_channels(aligned);
    WindowSpec spec = cfg.window;
    spec.fps = cfg.fps;
    const std::vector<WindowFeatures> kin = kinematic_features(channels, spec);

    RqaConfig cross_cfg = cfg.rqa;
    cross_cfg.radius_frac = cfg.crqa_radius_frac;
    const Series& ca = channels.at(cfg.crqa_pair.first);
    const Series& cb = channels.at(cfg.crqa_pair.second);

    bool warned_short = false;
    std::map<std::size_t, PerfWindow> perf;
    if (events) {
        const double duration_s = static_cast<double>(pre.length) / cfg.fps;
        for (const PerfWindow& w : windowed_perf(*events, spec, duration_s))
            perf[w.window_index] = w;
    }

    for (const WindowFeatures& wf : kin) {
        std::vector<double> row = wf.values;
        const std::size_t a = wf.start;
        const std::size_t b = wf.start + spec.length_samples();
        for (const auto& name : cfg.rqa_channels) {
            const Series& ch = channels.at(name);
            const Series win(ch.begin() + static_cast<std::ptrdiff_t>(a),
                             ch.begin() + static_cast<std::ptrdiff_t>(b));
            const RescaledSeries rs = rescale_unit(win);
            const Trajectory tr = embed(rs.values, cfg.embedding);
            const RecurrencePlot plot = recurrence_matrix(tr, nullptr, cfg.rqa);
            if (plot.short_window && !warned_short) {
                out.warnings.push_back(
                    "window below 1000 samples; recurrence distributions may "
                    "be unstable");
                warned_short = true;
            }
            for (double v : table_metric_values(rqa_metrics(plot, cfg.rqa)))
                row.push_back(v);
        }
        {
            const Series wa(ca.begin() + static_cast<std::ptrdiff_t>(a),
                            ca.begin() + static_cast<std::ptrdiff_t>(b));
            const Series wb(cb.begin() + static_cast<std::ptrdiff_t>(a),
                            cb.begin() + static_cast<std::ptrdiff_t>(b));
            const RqaMetrics m =
                crqa(rescale_unit(wa).values, rescale_unit(wb).values,
                     cfg.embedding, cross_cfg);
            for (double v : table_metric_values(m)) row.push_back(v);
        }
        if (events) {
            const auto it = perf.find(wf.window_index);
            if (it == perf.end()) {
                for (std::size_t k = 0; k < perf_column_names().size(); ++k)
                    row.push_back(kMissing);
            } else {
                const PerfWindow& p = it->second;
                row.push_back(p.tracking_acc);
                row.push_back(p.resman_acc);
                row.push_back(p.sysmon_acc);
                row.push_back(p.comms_acc);
                row.push_back(p.sysmon_rt);
                row.push_back(p.comms_rt);
            }
        }
        out.window_indices.push_back(wf.window_index);
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline std::string rows_to_csv(const UnitRows& rows) {
    std::string s = "window_index,values...\n";
    for (std::size_t i = 0; i < rows.rows.size(); ++i) {
        s += std::to_string(rows.window_indices[i]);
        for (double v : rows.rows[i]) {
            s += ',';
            s += csv::format_number(v);
        }
        s += '\n';
    }
    return s;
}

inline UnitRows rows_from_csv(const std::string& path) {
    csv::Table tbl = csv::read_file(path);
    UnitRows out;
    for (const auto& row : tbl.rows) {
        if (row.empty()) continue;
        out.window_indices.push_back(
            static_cast<std::size_t>(csv::parse_number(row[0])));
        std::vector<double> vals;
        for (std::size_t c = 1; c < row.size(); ++c)
            vals.push_back(csv::parse_number(row[c]));
        out.rows.push_back(std::move(vals));
    }
    return out;
}

}  // namespace detail

struct PipelineResult {
    FeatureMatrix features;
    std::string features_csv;           // path of the merged CSV
    std::vector<std::string> warnings;  // deterministic, per-unit prefixed
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

inline PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    if (!fs::is_directory(cfg.keypoints_dir))
        throw Error("keypoints directory not found: " + cfg.keypoints_dir);
    if (!cfg.events_dir.empty() && !fs::is_directory(cfg.events_dir))
        throw Error("events directory not found: " + cfg.events_dir);
    fs::create_directories(cfg.output_dir);
    const fs::path cache_dir = fs::path(cfg.output_dir) / "cache" / "features";
    fs::create_directories(cache_dir);

    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(cfg.keypoints_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 11 &&
            name.substr(name.size() - 11) == ".face.jsonl")
            files.push_back(name);
    }
    if (files.empty())
        throw Error("no *.face.jsonl files in " + cfg.keypoints_dir);
    std::sort(files.begin(), files.end());

    std::vector<UnitId> units;
    units.reserve(files.size());
    for (const auto& f : files) units.push_back(parse_unit_filename(f));

    // Stage: ingest + preprocess (parallel over recordings).
    std::vector<KeypointSeries> pre(units.size());
    std::vector<std::vector<std::string>> unit_warnings(units.size());
    parallel_for(units.size(), [&](std::size_t i) {
        const std::string path =
            (fs::path(cfg.keypoints_dir) / files[i]).string();
        try {
            const KeypointSeries raw =
                assemble_series(load_frames_jsonl(path), cfg.fps);
            const PreprocessResult pp = preprocess(raw, cfg.preprocess);
            pre[i] = pp.series;
            const std::size_t short_segs = pp.unfiltered_segments.size();
            if (short_segs > 0)
                unit_warnings[i].push_back(
                    std::to_string(short_segs) +
                    " segments too short for zero-phase filtering");
        } catch (const Error& e) {
            throw Error("stage preprocess, file " + files[i] + ": " + e.what());
        }
    });

    // Stage: template construction.
    std::map<std::string, AlignTemplate> templates;
    if (cfg.stabilization == StabilizationMode::per_participant) {
        std::map<std::string, std::vector<const KeypointSeries*>> by_p;
        for (std::size_t i = 0; i < units.size(); ++i)
            by_p[units[i].participant].push_back(&pre[i]);
        for (const auto& [p, series] : by_p) {
            templates[p] = build_template(series, cfg.template_ids);
            save_template(templates[p], (fs::path(cfg.output_dir) /
                                         ("template__" + p + ".txt"))
                                            .string());
        }
    } else {
        std::vector<const KeypointSeries*> all;
        for (const auto& s : pre) all.push_back(&s);
        templates[""] = build_template(all, cfg.template_ids);
        save_template(templates[""],
                      (fs::path(cfg.output_dir) / "template.txt").string());
    }
    auto template_for = [&](const UnitId& u) -> const AlignTemplate& {
        if (cfg.stabilization == StabilizationMode::per_participant)
            return templates.at(u.participant);
        return templates.at("");
    };

    // Stage: align + features + dynamics + performance merge, cached per
    // unit. Cache key: semantic config hash + input file hashes.
    const std::uint64_t chash = cfg.semantic_hash();
    std::vector<detail::UnitRows> rows(units.size());
    std::vector<int> hit(units.size(), 0);
    parallel_for(units.size(), [&](std::size_t i) {
        const std::string face_path =
            (fs::path(cfg.keypoints_dir) / files[i]).string();
        std::string events_path;
        std::vector<Event> events;
        bool have_events = false;
        if (!cfg.events_dir.empty()) {
            events_path = (fs::path(cfg.events_dir) /
                           (units[i].base + ".events.csv"))
                              .string();
            if (!fs::exists(events_path))
                throw Error("stage taskperf: missing event log " + events_path);
            have_events = true;
        }

        nlohmann::json manifest;
        manifest["semantic_hash"] = chash;
        manifest["face_hash"] = hash_file(face_path);
        manifest["events_hash"] = have_events ? hash_file(events_path) : 0;
        const std::string cache_csv =
            (cache_dir / (units[i].base + ".rows.csv")).string();
        const std::string cache_manifest =
            (cache_dir / (units[i].base + ".manifest.json")).string();

        if (fs::exists(cache_csv) && fs::exists(cache_manifest)) {
            std::ifstream in(cache_manifest);
            nlohmann::json existing;
            in >> existing;
            if (existing == manifest) {
                rows[i] = detail::rows_from_csv(cache_csv);
                hit[i] = 1;
                return;
            }
        }

        try {
            if (have_events) events = parse_event_log(events_path);
            rows[i] = detail::unit_feature_rows(pre[i], template_for(units[i]),
                                                cfg,
                                                have_events ? &events : nullptr);
        } catch (const Error& e) {
            throw Error("stage features, file " + files[i] + ": " + e.what());
        }
        write_atomic(cache_csv, detail::rows_to_csv(rows[i]));
        write_atomic(cache_manifest, manifest.dump(2) + "\n");
    });

    // Merge, in sorted unit order.
    PipelineResult result;
    result.features.columns = pipeline_columns(cfg);
    for (std::size_t i = 0; i < units.size(); ++i) {
        for (std::size_t r = 0; r < rows[i].rows.size(); ++r) {
            if (rows[i].rows[r].size() != result.features.cols())
                throw Error("cached row width mismatch for " + files[i] +
                            " (stale cache?)");
            FeatureRowMeta meta;
            meta.participant = units[i].participant;
            meta.session = units[i].session;
            meta.condition = units[i].condition;
            meta.window_index = rows[i].window_indices[r];
            result.features.add_row(meta, rows[i].rows[r]);
        }
        for (const auto& w : unit_warnings[i])
            result.warnings.push_back(files[i] + ": " + w);
        for (const auto& w : rows[i].warnings)
            result.warnings.push_back(files[i] + ": " + w);
        result.cache_hits += static_cast<std::size_t>(hit[i]);
        result.cache_misses += static_cast<std::size_t>(1 - hit[i]);
    }

    result.features_csv =
        (fs::path(cfg.output_dir) / "features.csv").string();
    {
        std::ostringstream ss;
        std::vector<std::string> header = {"participant", "session",
                                           "condition", "window_index"};
        for (const auto& c : result.features.columns) header.push_back(c);
        for (std::size_t i = 0; i < header.size(); ++i)
            ss << (i ? "," : "") << header[i];
        ss << '\n';
        for (std::size_t r = 0; r < result.features.rows(); ++r) {
            const auto& m = result.features.meta[r];
            ss << m.participant << ',' << m.session << ','
               << condition_names()[m.condition] << ',' << m.window_index;
            for (std::size_t c = 0; c < result.features.cols(); ++c)
                ss << ',' << csv::format_number(result.features.at(r, c));
            ss << '\n';
        }
        write_atomic(result.features_csv, ss.str());
    }
    {
        std::string log;
        for (const auto& w : result.warnings) log += w + "\n";
        write_atomic((fs::path(cfg.output_dir) / "run_log.txt").string(), log);
        nlohmann::json manifest;
        manifest["semantic_hash"] = chash;
        manifest["n_units"] = units.size();
        nlohmann::json jfiles = nlohmann::json::array();
        for (const auto& f : files) jfiles.push_back(f);
        manifest["files"] = jfiles;
        write_atomic((fs::path(cfg.output_dir) / "manifest.json").string(),
                     manifest.dump(2) + "\n");
    }
    return result;
}

}  // namespace facedyn
