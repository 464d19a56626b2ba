// Run configuration: every stage's parameters in one JSON-serializable
// struct. The config hash covers exactly the semantic fields, so cached
// stage outputs invalidate iff a parameter actually changed.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facedyn/common.hpp"
#include "facedyn/embedding.hpp"
#include "facedyn/features.hpp"
#include "facedyn/forest.hpp"
#include "facedyn/ml.hpp"
#include "facedyn/preprocess.hpp"
#include "facedyn/rqa.hpp"

namespace facedyn {

enum class StabilizationMode { global, per_participant, none };

inline std::string stabilization_name(StabilizationMode m) {
    switch (m) {
        case StabilizationMode::global: return "global";
        case StabilizationMode::per_participant: return "per-participant";
        case StabilizationMode::none: return "none";
    }
    return "?";
}

inline StabilizationMode parse_stabilization(const std::string& s) {
    if (s == "global") return StabilizationMode::global;
    if (s == "per-participant") return StabilizationMode::per_participant;
    if (s == "none") return StabilizationMode::none;
    throw InvalidParams("unknown stabilization mode '" + s + "'");
}

struct RunConfig {
    std::string keypoints_dir;
    std::string events_dir;  // optional; empty = no task-performance merge
    std::string output_dir = "out";
    double fps = 60.0;

    StabilizationMode stabilization = StabilizationMode::global;
    PreprocessConfig preprocess;
    EmbeddingParams embedding;
    RqaConfig rqa;                  // auto defaults (radius 0.20, theiler 2)
    double crqa_radius_frac = 0.30;
    WindowSpec window;
    ForestConfig forest;
    FeatureSelectConfig select;
    LearningCurveConfig curve;
    std::array<int, 4> template_ids = kDefaultTemplateIds;
    std::vector<std::string> rqa_channels = channel_names();
    std::pair<std::string, std::string> crqa_pair = {"tx", "pupil_x"};

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["keypoints_dir"] = keypoints_dir;
        j["events_dir"] = events_dir;
        j["output_dir"] = output_dir;
        j["fps"] = fps;
        j["stabilization"] = stabilization_name(stabilization);
        j["preprocess"] = {{"conf_threshold", preprocess.conf_threshold},
                           {"max_gap", preprocess.max_gap},
                           {"filter_order", preprocess.filter_order},
                           {"cutoff_hz", preprocess.cutoff_hz},
                           {"screen_w", preprocess.screen_w},
                           {"screen_h", preprocess.screen_h}};
        j["embedding"] = {{"tau", embedding.tau}, {"m", embedding.m}};
        j["rqa"] = {{"radius_frac", rqa.radius_frac},
                    {"theiler", rqa.theiler},
                    {"l_min", rqa.l_min},
                    {"v_min", rqa.v_min},
                    {"complexity",
                     rqa.complexity == ComplexityMode::range ? "range"
                                                             : "observed"}};
        j["crqa_radius_frac"] = crqa_radius_frac;
        j["window"] = {{"length_s", window.length_s},
                       {"overlap", window.overlap}};
        j["forest"] = {{"n_trees", forest.n_trees}, {"seed", forest.seed}};
        j["select"] = {{"var_threshold", select.var_threshold},
                       {"corr_threshold", select.corr_threshold},
                       {"elim_fraction", select.elim_fraction},
                       {"min_features", select.min_features},
                       {"perm_repeats", select.perm_repeats},
                       {"cv_folds", select.cv_folds},
                       {"stop_tolerance", select.stop_tolerance}};
        j["curve"] = {{"train_sizes", curve.train_sizes},
                      {"buffer", curve.buffer},
                      {"seeds_per_point", curve.seeds_per_point},
                      {"include_baseline", curve.include_baseline},
                      {"baseline_windows_per_condition",
                       curve.baseline_windows_per_condition}};
        j["template_ids"] = template_ids;
        j["rqa_channels"] = rqa_channels;
        j["crqa_pair"] = {crqa_pair.first, crqa_pair.second};
        return j;
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        auto get = [&](const char* key, auto& dst) {
            if (j.contains(key)) dst = j.at(key).template get<std::decay_t<decltype(dst)>>();
        };
        get("keypoints_dir", c.keypoints_dir);
        get("events_dir", c.events_dir);
        get("output_dir", c.output_dir);
        get("fps", c.fps);
        if (j.contains("stabilization"))
            c.stabilization =
                parse_stabilization(j.at("stabilization").get<std::string>());
        if (j.contains("preprocess")) {
            const auto& p = j.at("preprocess");
            if (p.contains("conf_threshold"))
                c.preprocess.conf_threshold = p.at("conf_threshold");
            if (p.contains("max_gap")) c.preprocess.max_gap = p.at("max_gap");
            if (p.contains("filter_order"))
                c.preprocess.filter_order = p.at("filter_order");
            if (p.contains("cutoff_hz")) c.preprocess.cutoff_hz = p.at("cutoff_hz");
            if (p.contains("screen_w")) c.preprocess.screen_w = p.at("screen_w");
            if (p.contains("screen_h")) c.preprocess.screen_h = p.at("screen_h");
        }
        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            if (e.contains("tau")) c.embedding.tau = e.at("tau");
            if (e.contains("m")) c.embedding.m = e.at("m");
        }
        if (j.contains("rqa")) {
            const auto& r = j.at("rqa");
            if (r.contains("radius_frac")) c.rqa.radius_frac = r.at("radius_frac");
            if (r.contains("theiler")) c.rqa.theiler = r.at("theiler");
            if (r.contains("l_min")) c.rqa.l_min = r.at("l_min");
            if (r.contains("v_min")) c.rqa.v_min = r.at("v_min");
            if (r.contains("complexity"))
                c.rqa.complexity = r.at("complexity") == "observed"
                                       ? ComplexityMode::observed
                                       : ComplexityMode::range;
        }
        get("crqa_radius_frac", c.crqa_radius_frac);
        if (j.contains("window")) {
            const auto& w = j.at("window");
            if (w.contains("length_s")) c.window.length_s = w.at("length_s");
            if (w.contains("overlap")) c.window.overlap = w.at("overlap");
        }
        c.window.fps = c.fps;
        if (j.contains("forest")) {
            const auto& f = j.at("forest");
            if (f.contains("n_trees")) c.forest.n_trees = f.at("n_trees");
            if (f.contains("seed")) c.forest.seed = f.at("seed");
        }
        if (j.contains("select")) {
            const auto& s = j.at("select");
            if (s.contains("var_threshold"))
                c.select.var_threshold = s.at("var_threshold");
            if (s.contains("corr_threshold"))
                c.select.corr_threshold = s.at("corr_threshold");
            if (s.contains("elim_fraction"))
                c.select.elim_fraction = s.at("elim_fraction");
            if (s.contains("min_features"))
                c.select.min_features = s.at("min_features");
            if (s.contains("perm_repeats"))
                c.select.perm_repeats = s.at("perm_repeats");
            if (s.contains("cv_folds")) c.select.cv_folds = s.at("cv_folds");
            if (s.contains("stop_tolerance"))
                c.select.stop_tolerance = s.at("stop_tolerance");
        }
        if (j.contains("curve")) {
            const auto& l = j.at("curve");
            if (l.contains("train_sizes"))
                c.curve.train_sizes =
                    l.at("train_sizes").get<std::vector<int>>();
            if (l.contains("buffer")) c.curve.buffer = l.at("buffer");
            if (l.contains("seeds_per_point"))
                c.curve.seeds_per_point = l.at("seeds_per_point");
            if (l.contains("include_baseline"))
                c.curve.include_baseline = l.at("include_baseline");
            if (l.contains("baseline_windows_per_condition"))
                c.curve.baseline_windows_per_condition =
                    l.at("baseline_windows_per_condition");
        }
        if (j.contains("template_ids")) {
            const auto v = j.at("template_ids").get<std::vector<int>>();
            if (v.size() != 4)
                throw InvalidParams("template_ids must hold 4 landmark ids");
            for (int i = 0; i < 4; ++i) c.template_ids[i] = v[i];
        }
        if (j.contains("rqa_channels"))
            c.rqa_channels =
                j.at("rqa_channels").get<std::vector<std::string>>();
        if (j.contains("crqa_pair")) {
            const auto v = j.at("crqa_pair").get<std::vector<std::string>>();
            if (v.size() != 2) throw InvalidParams("crqa_pair must hold 2 names");
            c.crqa_pair = {v[0], v[1]};
        }
        return c;
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open config " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot open " + path + " for writing");
        out << to_json().dump(2) << '\n';
    }

    // Hash over the semantic fields only (paths and output locations are
    // excluded so moving data does not invalidate caches).
    std::uint64_t semantic_hash() const {
        nlohmann::json j = to_json();
        j.erase("keypoints_dir");
        j.erase("events_dir");
        j.erase("output_dir");
        const std::string s = j.dump();
        return fnv1a(s.data(), s.size());
    }

    void validate() const {
        if (fps <= 0.0) throw InvalidParams("fps must be positive");
        preprocess.validate(fps);
        embedding.validate();
        rqa.validate();
        if (crqa_radius_frac <= 0.0)
            throw InvalidParams("crqa_radius_frac must be > 0");
        window.length_samples();
        window.hop_samples();
        forest.validate();
        select.validate();
        curve.validate();
        for (const auto& ch : rqa_channels)
            if (std::find(channel_names().begin(), channel_names().end(), ch) ==
                channel_names().end())
                throw InvalidParams("unknown rqa channel '" + ch + "'");
    }
};

}  // namespace facedyn
