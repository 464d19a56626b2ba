// Command-line front end. Subcommands mirror the pipeline stages; a JSON
// config file supplies defaults and individual flags override config keys.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facedyn/config.hpp"
#include "facedyn/embedding.hpp"
#include "facedyn/keypoints.hpp"
#include "facedyn/metrics.hpp"
#include "facedyn/ml.hpp"
#include "facedyn/model_io.hpp"
#include "facedyn/pipeline.hpp"
#include "facedyn/preprocess.hpp"
#include "facedyn/report.hpp"
#include "facedyn/rqa.hpp"
#include "facedyn/synth.hpp"
#include "facedyn/taskperf.hpp"

namespace fd = facedyn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Single-column numeric input: either a bare list of numbers or a CSV whose
// first row is a header.
fd::Series load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fd::Error("cannot open " + path);
    fd::Series out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = fd::csv::split(line);
        try {
            out.push_back(fd::csv::parse_number(cells[0]));
        } catch (const fd::Error&) {
            if (!first) throw;  // only the header row may be non-numeric
        }
        first = false;
    }
    if (out.empty()) throw fd::EmptyInput("no numeric values in " + path);
    return out;
}

void write_json(const std::string& path, const json& j) {
    fd::write_atomic(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fd::Error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

fd::FeatureMatrix load_features(const std::string& path) {
    std::size_t dropped = 0;
    fd::FeatureMatrix M = fd::read_feature_matrix(path, &dropped);
    if (dropped > 0)
        std::cerr << "note: dropped " << dropped
                  << " rows with missing values\n";
    return M;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"facial movement workload analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")
        ->check(CLI::ExistingFile);

    // ---- ingest -----------------------------------------------------------
    auto* c_ingest = app.add_subcommand(
        "ingest", "validate a keypoint JSONL file and emit a fixed-rate CSV");
    std::string in_path, out_path;
    double fps = 60.0;
    c_ingest->add_option("--input", in_path, "keypoint JSONL")->required();
    c_ingest->add_option("--output", out_path, "output CSV")->required();
    c_ingest->add_option("--fps", fps, "sampling rate");

    // ---- preprocess -------------------------------------------------------
    auto* c_pre = app.add_subcommand(
        "preprocess", "mask, interpolate, filter, and normalize one recording");
    c_pre->add_option("--input", in_path, "keypoint JSONL")->required();
    c_pre->add_option("--output", out_path, "output CSV")->required();
    c_pre->add_option("--fps", fps, "sampling rate");

    // ---- features (full pipeline) ------------------------------------------
    auto* c_feat = app.add_subcommand(
        "features", "run the full pipeline and write features.csv");
    std::string keypoints_dir, events_dir, output_dir, stab;
    double window_s = -1.0, overlap = -1.0;
    c_feat->add_option("--keypoints", keypoints_dir, "keypoint directory");
    c_feat->add_option("--events", events_dir, "event-log directory");
    c_feat->add_option("--out", output_dir, "output directory");
    c_feat->add_option("--stabilization", stab,
                       "global | per-participant | none");
    c_feat->add_option("--window-s", window_s, "window length, seconds");
    c_feat->add_option("--overlap", overlap, "window overlap fraction");
    c_feat->add_option("--fps", fps, "sampling rate");

    // ---- rqa ---------------------------------------------------------------
    auto* c_rqa = app.add_subcommand(
        "rqa", "recurrence metrics for one series (or two, cross mode)");
    std::string in_b;
    int tau = 20, m_dim = 4, theiler = 2, lmin = 4, vmin = 4;
    double radius = -1.0;
    bool suggest = false;
    std::string complexity = "range";
    c_rqa->add_option("--input", in_path, "numeric column file")->required();
    c_rqa->add_option("--input-b", in_b, "second series (cross recurrence)");
    c_rqa->add_option("--output", out_path, "metrics CSV (default stdout)");
    c_rqa->add_option("--tau", tau, "embedding delay");
    c_rqa->add_option("--m", m_dim, "embedding dimension");
    c_rqa->add_option("--radius", radius,
                      "radius as fraction of mean distance "
                      "(default 0.2 auto, 0.3 cross)");
    c_rqa->add_option("--theiler", theiler, "Theiler window (auto mode)");
    c_rqa->add_option("--lmin", lmin, "minimum diagonal line length");
    c_rqa->add_option("--vmin", vmin, "minimum vertical line length");
    c_rqa->add_option("--complexity", complexity, "range | observed");
    c_rqa->add_flag("--suggest-params", suggest,
                    "print AMI delay and FNN dimension estimates instead");

    // ---- perf --------------------------------------------------------------
    auto* c_perf = app.add_subcommand(
        "perf", "task-performance metrics from an event log");
    double duration = -1.0;
    c_perf->add_option("--input", in_path, "event-log CSV")->required();
    c_perf->add_option("--output", out_path, "output CSV (default stdout)");
    c_perf->add_option("--window-s", window_s,
                       "window length, seconds (omit for whole log)");
    c_perf->add_option("--overlap", overlap, "window overlap fraction");
    c_perf->add_option("--fps", fps, "sampling rate of the window grid");
    c_perf->add_option("--duration", duration,
                       "log duration, seconds (default: last event time)");

    // ---- train -------------------------------------------------------------
    auto* c_train = app.add_subcommand(
        "train", "train a forest on all rows of a feature matrix");
    std::string features_path, model_path;
    std::uint64_t seed = 1;
    int n_trees = 300;
    c_train->add_option("--features", features_path, "features.csv")
        ->required();
    c_train->add_option("--output", model_path, "model JSON")->required();
    c_train->add_option("--seed", seed, "forest seed");
    c_train->add_option("--trees", n_trees, "number of trees");

    // ---- eval-split --------------------------------------------------------
    auto* c_split = app.add_subcommand(
        "eval-split", "repeated stratified random-split evaluation");
    int n_seeds = 15;
    bool no_selection = false;
    double test_frac = 0.2;
    c_split->add_option("--features", features_path, "features.csv")
        ->required();
    c_split->add_option("--output", out_path, "result JSON")->required();
    c_split->add_option("--seeds", n_seeds, "number of split seeds");
    c_split->add_option("--test-frac", test_frac, "held-out fraction");
    c_split->add_option("--trees", n_trees, "number of trees");
    c_split->add_flag("--no-selection", no_selection,
                      "skip backward feature elimination");

    // ---- eval-lopo ---------------------------------------------------------
    auto* c_lopo = app.add_subcommand(
        "eval-lopo", "leave-one-participant-out evaluation");
    c_lopo->add_option("--features", features_path, "features.csv")
        ->required();
    c_lopo->add_option("--output", out_path, "result JSON")->required();
    c_lopo->add_option("--seeds", n_seeds, "forest seeds per participant");
    c_lopo->add_option("--trees", n_trees, "number of trees");

    // ---- learning-curve ----------------------------------------------------
    auto* c_curve = app.add_subcommand(
        "learning-curve", "participant-specific accuracy vs training size");
    std::vector<int> sizes;
    int buffer = 1, curve_seeds = 10;
    bool include_baseline = false;
    c_curve->add_option("--features", features_path, "features.csv")
        ->required();
    c_curve->add_option("--output", out_path, "result JSON")->required();
    c_curve->add_option("--sizes", sizes, "training sizes per condition");
    c_curve->add_option("--buffer", buffer, "windows skipped after training");
    c_curve->add_option("--seeds", curve_seeds, "forest seeds per point");
    c_curve->add_option("--trees", n_trees, "number of trees");
    c_curve->add_flag("--include-baseline", include_baseline,
                      "add baseline-session windows to every training set");

    // ---- synth -------------------------------------------------------------
    auto* c_synth = app.add_subcommand(
        "synth", "generate a synthetic keypoint + event-log corpus");
    std::size_t participants = 2;
    double synth_duration = 30.0;
    c_synth->add_option("--out", output_dir, "corpus directory")->required();
    c_synth->add_option("--participants", participants, "participant count");
    c_synth->add_option("--seconds", synth_duration, "recording length");
    c_synth->add_option("--fps", fps, "sampling rate");
    c_synth->add_option("--seed", seed, "master seed");

    // ---- report ------------------------------------------------------------
    auto* c_report = app.add_subcommand(
        "report", "format harness JSON outputs as mean ± sd tables");
    std::string split_path, lopo_path, curve_path;
    c_report->add_option("--split", split_path, "eval-split JSON");
    c_report->add_option("--lopo", lopo_path, "eval-lopo JSON");
    c_report->add_option("--curve", curve_path, "learning-curve JSON");
    c_report->add_option("--output", out_path, "report text file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        fd::RunConfig cfg;
        if (!config_path.empty()) cfg = fd::RunConfig::load(config_path);

        if (*c_ingest) {
            const auto frames = fd::load_frames_jsonl(in_path);
            const auto series = fd::assemble_series(frames, fps);
            fd::write_series_csv(series, out_path);
            std::cout << "frames " << frames.size() << ", samples "
                      << series.length << " -> " << out_path << "\n";
        } else if (*c_pre) {
            const auto frames = fd::load_frames_jsonl(in_path);
            auto series = fd::assemble_series(frames, fps);
            const auto res = fd::preprocess(std::move(series), cfg.preprocess);
            fd::write_series_csv(res.series, out_path);
            std::cout << "samples " << res.series.length << ", "
                      << res.unfiltered_segments.size()
                      << " segments skipped filtering -> " << out_path << "\n";
        } else if (*c_feat) {
            if (!keypoints_dir.empty()) cfg.keypoints_dir = keypoints_dir;
            if (!events_dir.empty()) cfg.events_dir = events_dir;
            if (!output_dir.empty()) cfg.output_dir = output_dir;
            if (!stab.empty()) cfg.stabilization = fd::parse_stabilization(stab);
            if (window_s > 0.0) cfg.window.length_s = window_s;
            if (overlap >= 0.0) cfg.window.overlap = overlap;
            if (c_feat->count("--fps")) cfg.fps = fps;
            const fd::PipelineResult res = fd::run_pipeline(cfg);
            std::cout << res.features.rows() << " rows x "
                      << res.features.cols() << " feature columns -> "
                      << res.features_csv << "\n"
                      << "cache: " << res.cache_hits << " hits, "
                      << res.cache_misses << " misses\n";
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        } else if (*c_rqa) {
            const fd::Series a = load_series(in_path);
            fd::EmbeddingParams ep;
            ep.tau = tau;
            ep.m = m_dim;
            if (suggest) {
                const auto ar = fd::ami(fd::rescale_unit(a).values);
                const auto fr =
                    fd::fnn(fd::rescale_unit(a).values, ar.selected_tau);
                std::cout << "tau " << ar.selected_tau << ", m "
                          << fr.selected_m << "\n";
                return 0;
            }
            fd::RqaConfig rc;
            rc.theiler = theiler;
            rc.l_min = lmin;
            rc.v_min = vmin;
            rc.complexity = complexity == "observed"
                                ? fd::ComplexityMode::observed
                                : fd::ComplexityMode::range;
            fd::RqaMetrics met;
            if (in_b.empty()) {
                rc.radius_frac = radius > 0.0 ? radius : 0.20;
                met = fd::rqa(fd::rescale_unit(a).values, ep, rc);
            } else {
                rc.radius_frac = radius > 0.0 ? radius : 0.30;
                const fd::Series b = load_series(in_b);
                met = fd::crqa(fd::rescale_unit(a).values,
                               fd::rescale_unit(b).values, ep, rc);
            }
            std::string text = "metric,value\n";
            for (const auto& [k, v] : met.as_map())
                text += k + "," + fd::csv::format_number(v) + "\n";
            if (out_path.empty())
                std::cout << text;
            else
                fd::write_atomic(out_path, text);
        } else if (*c_perf) {
            const auto events = fd::parse_event_log(in_path);
            std::string text;
            if (window_s > 0.0) {
                fd::WindowSpec spec;
                spec.length_s = window_s;
                spec.overlap = overlap >= 0.0 ? overlap : 0.5;
                spec.fps = fps;
                const double dur =
                    duration > 0.0
                        ? duration
                        : (events.empty() ? 0.0 : events.back().t);
                text = "window_index,start_s";
                for (const auto& c : fd::perf_column_names()) text += "," + c;
                text += "\n";
                for (const auto& w : fd::windowed_perf(events, spec, dur)) {
                    text += std::to_string(w.window_index) + "," +
                            fd::csv::format_number(w.start_s);
                    for (double v : {w.tracking_acc, w.resman_acc, w.sysmon_acc,
                                     w.comms_acc, w.sysmon_rt, w.comms_rt})
                        text += "," + fd::csv::format_number(v);
                    text += "\n";
                }
            } else {
                text = "metric,value\n";
                auto add = [&](const std::string& k, double v) {
                    text += k + "," + fd::csv::format_number(v) + "\n";
                };
                const double end =
                    duration > 0.0
                        ? duration
                        : (events.empty() ? 0.0 : events.back().t + 1.0);
                const auto tr = fd::tracking_accuracy(events, 0.0, end);
                const auto rm = fd::resman_accuracy(events, 0.0, end);
                add("tracking_acc", tr ? *tr : fd::kMissing);
                add("resman_acc", rm ? *rm : fd::kMissing);
                const auto sm = fd::sysmon_accuracy(events, 0.0, end);
                const auto cm = fd::comms_accuracy(events, 0.0, end);
                add("sysmon_acc", sm ? *sm : fd::kMissing);
                add("comms_acc", cm ? *cm : fd::kMissing);
                const auto rt = fd::reaction_times(events, 0.0, end);
                add("sysmon_rt", rt.sysmon_rt ? *rt.sysmon_rt : fd::kMissing);
                add("comms_rt", rt.comms_rt ? *rt.comms_rt : fd::kMissing);
            }
            if (out_path.empty())
                std::cout << text;
            else
                fd::write_atomic(out_path, text);
        } else if (*c_train) {
            const fd::FeatureMatrix M = load_features(features_path);
            fd::ForestConfig fc = cfg.forest;
            fc.seed = seed;
            fc.n_trees = n_trees;
            const auto all = M.all_rows();
            const auto kept = fd::filter_columns(M, cfg.select, all);
            const fd::TrainedModel model = fd::train_forest(M, all, kept, fc);
            fd::save_model(model, M.columns, model_path);
            std::cout << "trained on " << all.size() << " rows, "
                      << kept.size() << " of " << M.cols()
                      << " features kept -> " << model_path << "\n";
        } else if (*c_split) {
            const fd::FeatureMatrix M = load_features(features_path);
            fd::ForestConfig fc = cfg.forest;
            fc.n_trees = n_trees;
            const auto res = fd::random_split_eval(
                M, cfg.select, fc,
                fd::default_seeds(static_cast<std::size_t>(n_seeds)),
                !no_selection, test_frac);
            write_json(out_path, fd::split_eval_json(res, M.columns));
            std::cout << "balanced accuracy "
                      << fd::format_percent_pm(res.balanced_accuracy) << " over "
                      << res.seeds.size() << " splits -> " << out_path << "\n";
        } else if (*c_lopo) {
            const fd::FeatureMatrix M = load_features(features_path);
            fd::ForestConfig fc = cfg.forest;
            fc.n_trees = n_trees;
            const auto res = fd::lopo_eval(M, fc, n_seeds);
            write_json(out_path, fd::lopo_json(res));
            std::cout << "LOPO balanced accuracy "
                      << fd::format_percent_pm(res.aggregate) << " over "
                      << res.participants.size() << " participants -> "
                      << out_path << "\n";
        } else if (*c_curve) {
            const fd::FeatureMatrix M = load_features(features_path);
            fd::LearningCurveConfig lc = cfg.curve;
            if (!sizes.empty()) lc.train_sizes = sizes;
            lc.buffer = buffer;
            lc.seeds_per_point = curve_seeds;
            lc.include_baseline = include_baseline;
            fd::ForestConfig fc = cfg.forest;
            fc.n_trees = n_trees;
            const auto res = fd::learning_curve(M, lc, cfg.select, fc);
            write_json(out_path, fd::learning_curve_json(res));
            std::cout << res.population.size() << " curve points -> "
                      << out_path << "\n";
        } else if (*c_synth) {
            fs::create_directories(output_dir);
            fd::synth::CorpusConfig cc;
            cc.n_participants = participants;
            cc.duration_s = synth_duration;
            cc.fps = fps;
            cc.seed = seed;
            const auto files = fd::synth::write_corpus(output_dir, cc);
            std::cout << files.size() << " files -> " << output_dir << "\n";
        } else if (*c_report) {
            if (split_path.empty() && lopo_path.empty() && curve_path.empty())
                throw fd::InvalidParams(
                    "report needs at least one of --split/--lopo/--curve");
            json split_j, lopo_j, curve_j;
            if (!split_path.empty()) split_j = read_json(split_path);
            if (!lopo_path.empty()) lopo_j = read_json(lopo_path);
            if (!curve_path.empty()) curve_j = read_json(curve_path);
            const std::string text = fd::render_report(
                split_path.empty() ? nullptr : &split_j,
                lopo_path.empty() ? nullptr : &lopo_j,
                curve_path.empty() ? nullptr : &curve_j);
            fd::write_atomic(out_path, text);
            std::cout << "report -> " << out_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
