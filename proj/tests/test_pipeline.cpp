// End-to-end pipeline on a generated corpus: column layout, caching,
// stabilization modes, and failure reporting.
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "facedyn/pipeline.hpp"
#include "facedyn/synth.hpp"

using namespace facedyn;
namespace fsys = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Fixture {
    fsys::path root;
    std::string corpus;

    Fixture() {
        root = fsys::temp_directory_path() / "facedyn_pipeline";
        fsys::remove_all(root);
        corpus = (root / "corpus").string();
        fsys::create_directories(corpus);
        synth::CorpusConfig cc;
        cc.n_participants = 2;
        cc.duration_s = 18.0;
        cc.fps = 30.0;
        cc.seed = 7;
        cc.jitter_sd = 0.3;
        synth::write_corpus(corpus, cc);
    }
    ~Fixture() { fsys::remove_all(root); }

    RunConfig config(const std::string& out_name) const {
        RunConfig cfg;
        cfg.keypoints_dir = corpus;
        cfg.events_dir = corpus;
        cfg.output_dir = (root / out_name).string();
        cfg.fps = 30.0;
        cfg.window.length_s = 6.0;
        cfg.window.overlap = 0.5;
        cfg.window.fps = 30.0;
        return cfg;
    }
};

}  // namespace

TEST_CASE("unit filenames parse into participant, session, condition",
          "[pipeline]") {
    const auto id = parse_unit_filename("P07__experimental__Moderate.face.jsonl");
    REQUIRE(id.participant == "P07");
    REQUIRE(id.session == "experimental");
    REQUIRE(id.condition == 1);
    REQUIRE(id.base == "P07__experimental__Moderate");
    REQUIRE_THROWS_AS(parse_unit_filename("P07__experimental__Moderate.csv"),
                      InvalidParams);
    REQUIRE_THROWS_AS(parse_unit_filename("P07__warmup__Low.face.jsonl"),
                      InvalidParams);
    REQUIRE_THROWS_AS(parse_unit_filename("P07__experimental__Extreme.face.jsonl"),
                      InvalidParams);
    REQUIRE_THROWS_AS(parse_unit_filename("P07__experimental.face.jsonl"),
                      InvalidParams);
}

TEST_CASE("atomic writes leave no partial files", "[pipeline]") {
    auto dir = fsys::temp_directory_path() / "facedyn_atomic";
    fsys::create_directories(dir);
    const auto path = (dir / "a.txt").string();
    write_atomic(path, "payload");
    REQUIRE(slurp(path) == "payload");
    REQUIRE_FALSE(fsys::exists(path + ".partial"));
    write_atomic(path, "rewritten");
    REQUIRE(slurp(path) == "rewritten");

    REQUIRE(hash_file(path) == hash_file(path));
    const auto other = (dir / "b.txt").string();
    write_atomic(other, "payload");
    REQUIRE(hash_file(other) != hash_file(path));
    REQUIRE_THROWS_AS(hash_file((dir / "absent").string()), Error);
    fsys::remove_all(dir);
}

TEST_CASE("the pipeline emits the full feature table", "[pipeline]") {
    Fixture fx;
    auto cfg = fx.config("out1");
    auto res = run_pipeline(cfg);

    // 12 channels x 3 derivatives x 9 stats, 11 recurrence measures per
    // channel, 11 cross measures, 6 performance measures.
    REQUIRE(kinematic_column_names().size() == 324);
    REQUIRE(res.features.columns.size() == 473);
    REQUIRE(res.features.columns == pipeline_columns(cfg));
    REQUIRE_FALSE(res.features.columns.empty());
    REQUIRE(std::find(res.features.columns.begin(), res.features.columns.end(),
                      "blink__rqa__det") != res.features.columns.end());
    REQUIRE(std::find(res.features.columns.begin(), res.features.columns.end(),
                      "tx__pupil_x__crqa__rr") != res.features.columns.end());
    REQUIRE(res.features.columns.back() == "perf__comms__rt");

    // 8 recordings, 5 windows each (18 s, 6 s windows, 50% overlap).
    REQUIRE(res.features.rows() == 40);
    for (const auto& m : res.features.meta) REQUIRE(m.window_index <= 4);
    REQUIRE(res.cache_misses == 8);
    REQUIRE(res.cache_hits == 0);

    // Output files land next to the cache.
    REQUIRE(fsys::exists(res.features_csv));
    REQUIRE(fsys::exists(fsys::path(cfg.output_dir) / "run_log.txt"));
    REQUIRE(fsys::exists(fsys::path(cfg.output_dir) / "manifest.json"));
    REQUIRE(fsys::exists(fsys::path(cfg.output_dir) / "template.txt"));

    // The CSV mirror parses back with the same columns.
    std::size_t dropped = 0;
    auto back = read_feature_matrix(res.features_csv, &dropped);
    REQUIRE(back.columns == res.features.columns);
    REQUIRE(back.rows() + dropped == res.features.rows());
}

TEST_CASE("a second run is served from the cache byte-for-byte", "[pipeline]") {
    Fixture fx;
    auto cfg = fx.config("out2");
    auto first = run_pipeline(cfg);
    const std::string bytes1 = slurp(first.features_csv);

    auto second = run_pipeline(cfg);
    REQUIRE(second.cache_hits == 8);
    REQUIRE(second.cache_misses == 0);
    REQUIRE(slurp(second.features_csv) == bytes1);
    // Element-wise: missing values are NaN, so == on the vectors would fail.
    REQUIRE(second.features.values.size() == first.features.values.size());
    for (std::size_t i = 0; i < first.features.values.size(); ++i) {
        if (is_missing(first.features.values[i]))
            REQUIRE(is_missing(second.features.values[i]));
        else
            REQUIRE(second.features.values[i] == first.features.values[i]);
    }

    // A semantic change invalidates every unit.
    auto changed = cfg;
    changed.rqa.radius_frac = 0.25;
    auto third = run_pipeline(changed);
    REQUIRE(third.cache_misses == 8);
    REQUIRE(slurp(third.features_csv) != bytes1);
}

TEST_CASE("dropping the events directory drops the performance block",
          "[pipeline]") {
    Fixture fx;
    auto cfg = fx.config("out3");
    cfg.events_dir.clear();
    auto res = run_pipeline(cfg);
    REQUIRE(res.features.columns.size() == 467);
    for (const auto& c : res.features.columns)
        REQUIRE(c.find("tracking") == std::string::npos);
}

TEST_CASE("per-participant stabilization writes one template each",
          "[pipeline]") {
    Fixture fx;
    auto cfg = fx.config("out4");
    cfg.stabilization = StabilizationMode::per_participant;
    auto res = run_pipeline(cfg);
    REQUIRE(res.features.rows() == 40);
    REQUIRE(fsys::exists(fsys::path(cfg.output_dir) / "template__P01.txt"));
    REQUIRE(fsys::exists(fsys::path(cfg.output_dir) / "template__P02.txt"));
    REQUIRE_FALSE(fsys::exists(fsys::path(cfg.output_dir) / "template.txt"));

    auto none_cfg = fx.config("out5");
    none_cfg.stabilization = StabilizationMode::none;
    auto unaligned = run_pipeline(none_cfg);
    REQUIRE(unaligned.features.rows() == 40);
    // Raw coordinates differ from the stabilized run (byte-level compare
    // sidesteps NaN inequality on missing cells).
    auto global_res = run_pipeline(fx.config("out6"));
    REQUIRE(slurp(unaligned.features_csv) != slurp(global_res.features_csv));
}

TEST_CASE("failures name the stage and the offending file", "[pipeline]") {
    Fixture fx;
    auto cfg = fx.config("out7");
    cfg.keypoints_dir = (fx.root / "nowhere").string();
    REQUIRE_THROWS_WITH(run_pipeline(cfg),
                        Catch::Matchers::ContainsSubstring("keypoints directory"));

    auto cfg2 = fx.config("out8");
    cfg2.events_dir = (fx.root / "missing_events").string();
    REQUIRE_THROWS_WITH(run_pipeline(cfg2),
                        Catch::Matchers::ContainsSubstring("events directory"));

    // Remove one event log: the error names it.
    auto cfg3 = fx.config("out9");
    const auto victim =
        fsys::path(fx.corpus) / "P01__experimental__High.events.csv";
    const std::string saved = slurp(victim.string());
    fsys::remove(victim);
    REQUIRE_THROWS_WITH(run_pipeline(cfg3), Catch::Matchers::ContainsSubstring(
                                                "P01__experimental__High"));
    write_atomic(victim.string(), saved);

    // Corrupt one face file: the error names the stage and file.
    auto cfg4 = fx.config("out10");
    const auto face =
        fsys::path(fx.corpus) / "P02__baseline__Low.face.jsonl";
    const std::string face_saved = slurp(face.string());
    write_atomic(face.string(), "{not json\n");
    REQUIRE_THROWS_WITH(run_pipeline(cfg4),
                        Catch::Matchers::ContainsSubstring("stage preprocess") &&
                            Catch::Matchers::ContainsSubstring("P02__baseline__Low"));
    write_atomic(face.string(), face_saved);
}
