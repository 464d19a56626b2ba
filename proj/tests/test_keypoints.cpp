// Keypoint JSONL parsing, frame assembly, and CSV number round trips.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "facedyn/csv.hpp"
#include "facedyn/keypoints.hpp"
#include "facedyn/rng.hpp"

using namespace facedyn;

namespace {

std::string frame_json(std::int64_t frame, const std::vector<std::string>& nums) {
    std::string s = "{\"frame\": " + std::to_string(frame) + ", \"face\": [";
    for (std::size_t i = 0; i < nums.size(); ++i) {
        if (i) s += ", ";
        s += nums[i];
    }
    return s + "]}";
}

std::vector<std::string> repeat_num(const std::string& v, std::size_t n) {
    return std::vector<std::string>(n, v);
}

std::filesystem::path temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("record with 210 zeros parses to 70 keypoints at origin", "[keypoints]") {
    auto f = parse_frame(frame_json(0, repeat_num("0", 210)));
    REQUIRE(f.frame_index == 0);
    for (const auto& p : f.points) {
        REQUIRE(p.x == 0.0);
        REQUIRE(p.y == 0.0);
        REQUIRE(p.confidence == 0.0);
        REQUIRE_FALSE(p.missing());
    }
}

TEST_CASE("record with 209 numbers is rejected", "[keypoints]") {
    REQUIRE_THROWS_AS(parse_frame(frame_json(0, repeat_num("0", 209))),
                      MalformedRecord);
    REQUIRE_THROWS_AS(parse_frame(frame_json(0, repeat_num("0", 211))),
                      MalformedRecord);
}

TEST_CASE("null coordinates mark the landmark missing", "[keypoints]") {
    auto nums = repeat_num("1", 210);
    nums[0] = "null";  // x of landmark 0
    auto f = parse_frame(frame_json(3, nums));
    REQUIRE(f.points[0].missing());
    REQUIRE_FALSE(f.points[1].missing());
    REQUIRE(f.frame_index == 3);
}

TEST_CASE("confidence outside [0,1] is rejected", "[keypoints]") {
    auto high = repeat_num("0.5", 210);
    high[2] = "1.5";
    REQUIRE_THROWS_AS(parse_frame(frame_json(0, high)), MalformedRecord);
    auto low = repeat_num("0.5", 210);
    low[2] = "-0.1";
    REQUIRE_THROWS_AS(parse_frame(frame_json(0, low)), MalformedRecord);
}

TEST_CASE("negative or non-integer frame index is rejected", "[keypoints]") {
    REQUIRE_THROWS_AS(parse_frame(frame_json(-1, repeat_num("0", 210))),
                      MalformedRecord);
    std::string s = "{\"frame\": 1.5, \"face\": [";
    for (int i = 0; i < 210; ++i) s += i ? ",0" : "0";
    s += "]}";
    REQUIRE_THROWS_AS(parse_frame(s), MalformedRecord);
}

TEST_CASE("serialize then parse round-trips 50 records", "[keypoints]") {
    Rng rng(42);
    std::vector<FrameKeypoints> frames;
    for (int t = 0; t < 50; ++t) {
        FrameKeypoints f;
        f.frame_index = t;
        for (auto& p : f.points) {
            if (rng.uniform() < 0.05) {
                p.x = kMissing;
                p.y = kMissing;
                p.confidence = 0.0;
            } else {
                p.x = rng.uniform(-100.0, 2560.0);
                p.y = rng.uniform(-50.0, 1440.0);
                p.confidence = rng.uniform();
            }
        }
        frames.push_back(f);
    }
    for (const auto& f : frames) {
        auto back = parse_frame(serialize_frame(f));
        REQUIRE(back.frame_index == f.frame_index);
        for (int l = 0; l < kFaceLandmarks; ++l) {
            const auto& a = f.points[l];
            const auto& b = back.points[l];
            REQUIRE(a.missing() == b.missing());
            if (!a.missing()) {
                REQUIRE(a.x == b.x);
                REQUIRE(a.y == b.y);
            }
            REQUIRE(a.confidence == b.confidence);
        }
    }
}

TEST_CASE("assembly of frames 0,1,2 gives a dense series", "[keypoints]") {
    std::vector<FrameKeypoints> frames(3);
    for (int t = 0; t < 3; ++t) {
        frames[t].frame_index = t;
        for (auto& p : frames[t].points) {
            p.x = 1.0 + t;
            p.y = 2.0 + t;
            p.confidence = 0.9;
        }
    }
    auto s = assemble_series(frames, 60.0);
    REQUIRE(s.length == 3);
    REQUIRE(s.fps == 60.0);
    for (int t = 0; t < 3; ++t) {
        REQUIRE(s.x[0][t] == 1.0 + t);
        REQUIRE(s.y[0][t] == 2.0 + t);
        REQUIRE(s.confidence[0][t] == 0.9);
    }
}

TEST_CASE("a skipped frame index becomes a missing sample", "[keypoints]") {
    std::vector<FrameKeypoints> frames(2);
    frames[0].frame_index = 0;
    frames[1].frame_index = 2;
    for (auto& f : frames)
        for (auto& p : f.points) {
            p.x = 5.0;
            p.y = 6.0;
            p.confidence = 1.0;
        }
    auto s = assemble_series(frames, 60.0);
    REQUIRE(s.length == 3);
    REQUIRE(is_missing(s.x[10][1]));
    REQUIRE(is_missing(s.y[10][1]));
    REQUIRE(s.confidence[10][1] == 0.0);
    REQUIRE(s.x[10][0] == 5.0);
    REQUIRE(s.x[10][2] == 5.0);
}

TEST_CASE("series length is highest frame index plus one", "[keypoints]") {
    std::vector<FrameKeypoints> frames(2);
    frames[0].frame_index = 0;
    frames[1].frame_index = 41;
    auto s = assemble_series(frames, 60.0);
    REQUIRE(s.length == 42);
}

TEST_CASE("out-of-order and duplicate frame indices are rejected", "[keypoints]") {
    std::vector<FrameKeypoints> swapped(2);
    swapped[0].frame_index = 1;
    swapped[1].frame_index = 0;
    REQUIRE_THROWS_AS(assemble_series(swapped, 60.0), NonMonotonicIndex);

    std::vector<FrameKeypoints> dup(2);
    dup[0].frame_index = 3;
    dup[1].frame_index = 3;
    REQUIRE_THROWS_AS(assemble_series(dup, 60.0), DuplicateFrame);
}

TEST_CASE("jsonl loader names the file and line on error", "[keypoints]") {
    auto dir = temp_dir("facedyn_kp_err");
    auto path = (dir / "bad.face.jsonl").string();
    {
        std::ofstream out(path);
        out << frame_json(0, repeat_num("0", 210)) << '\n';
        out << "{\"frame\": 1}" << '\n';
    }
    try {
        load_frames_jsonl(path);
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        const std::string what = e.what();
        REQUIRE(what.find(path) != std::string::npos);
        REQUIRE(what.find(":2:") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("jsonl writer and loader round-trip a file", "[keypoints]") {
    auto dir = temp_dir("facedyn_kp_rt");
    auto path = (dir / "a.face.jsonl").string();
    Rng rng(7);
    std::vector<FrameKeypoints> frames(10);
    for (int t = 0; t < 10; ++t) {
        frames[t].frame_index = t;
        for (auto& p : frames[t].points) {
            p.x = rng.uniform(0.0, 100.0);
            p.y = rng.uniform(0.0, 100.0);
            p.confidence = rng.uniform();
        }
    }
    write_frames_jsonl(frames, path);
    auto back = load_frames_jsonl(path);
    REQUIRE(back.size() == frames.size());
    for (std::size_t t = 0; t < frames.size(); ++t) {
        REQUIRE(back[t].frame_index == frames[t].frame_index);
        for (int l = 0; l < kFaceLandmarks; ++l)
            REQUIRE(back[t].points[l].x == frames[t].points[l].x);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("csv number formatting round-trips doubles exactly", "[keypoints]") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, rng.below(7));
        REQUIRE(csv::parse_number(csv::format_number(v)) == v);
    }
    REQUIRE(csv::format_number(kMissing) == "nan");
    REQUIRE(is_missing(csv::parse_number("nan")));
    REQUIRE(is_missing(csv::parse_number("")));
    REQUIRE_THROWS_AS(csv::parse_number("3.5x"), MalformedRow);
    REQUIRE_THROWS_AS(csv::parse_number("abc"), MalformedRow);
}
