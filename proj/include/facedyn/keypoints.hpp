// Keypoint ingestion: per-frame 70-landmark face records assembled into
// fixed-rate, gap-aware time series.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facedyn/common.hpp"
#include "facedyn/csv.hpp"

namespace facedyn {

inline constexpr int kFaceLandmarks = 70;

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;

    bool missing() const { return is_missing(x) || is_missing(y); }
};

struct FrameKeypoints {
    std::int64_t frame_index = 0;
    std::array<Keypoint, kFaceLandmarks> points{};
};

// One track per landmark; all tracks share a common length. A missing frame
// has NaN x/y and confidence 0 at every landmark.
struct KeypointSeries {
    double fps = 60.0;
    std::size_t length = 0;
    std::array<Series, kFaceLandmarks> x{};
    std::array<Series, kFaceLandmarks> y{};
    std::array<Series, kFaceLandmarks> confidence{};
};

// ---------------------------------------------------------------------------
// Frame records. The JSONL form is one object per line:
//   {"frame": 12, "face": [x0, y0, c0, ..., x69, y69, c69]}
// The CSV form is one row per landmark: frame,id,x,y,c.
// ---------------------------------------------------------------------------

inline FrameKeypoints parse_frame(const std::string& record) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(record);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord(std::string("bad frame record: ") + e.what());
    }
    if (!j.is_object() || !j.contains("frame") || !j.contains("face"))
        throw MalformedRecord("frame record must be {\"frame\": n, \"face\": [...]}");
    const auto& face = j["face"];
    if (!face.is_array() || face.size() != 3 * kFaceLandmarks)
        throw MalformedRecord("face array must hold exactly " +
                              std::to_string(3 * kFaceLandmarks) + " numbers, got " +
                              std::to_string(face.size()));
    FrameKeypoints out;
    if (!j["frame"].is_number_integer() || j["frame"].get<std::int64_t>() < 0)
        throw MalformedRecord("frame index must be a non-negative integer");
    out.frame_index = j["frame"].get<std::int64_t>();
    for (int i = 0; i < kFaceLandmarks; ++i) {
        Keypoint& p = out.points[i];
        for (int k = 0; k < 3; ++k) {
            const auto& cell = face[3 * i + k];
            double v;
            if (cell.is_null()) {
                v = kMissing;
            } else if (cell.is_number()) {
                v = cell.get<double>();
            } else {
                throw MalformedRecord("non-numeric value at face[" +
                                      std::to_string(3 * i + k) + "]");
            }
            if (k == 0) p.x = v;
            else if (k == 1) p.y = v;
            else p.confidence = v;
        }
        if (is_missing(p.confidence)) p.confidence = 0.0;
        if (p.confidence < 0.0 || p.confidence > 1.0)
            throw MalformedRecord("confidence out of [0,1] at landmark " +
                                  std::to_string(i));
        if (!std::isfinite(p.x)) p.x = kMissing;
        if (!std::isfinite(p.y)) p.y = kMissing;
    }
    return out;
}

inline std::string serialize_frame(const FrameKeypoints& frame) {
    nlohmann::json face = nlohmann::json::array();
    for (const auto& p : frame.points) {
        if (is_missing(p.x)) face.push_back(nullptr); else face.push_back(p.x);
        if (is_missing(p.y)) face.push_back(nullptr); else face.push_back(p.y);
        face.push_back(p.confidence);
    }
    nlohmann::json j;
    j["frame"] = frame.frame_index;
    j["face"] = std::move(face);
    return j.dump();
}

// Missing frame indices become flagged-missing samples so the assembled
// series stays fixed-rate; output length is max(frame_index)+1.
inline KeypointSeries assemble_series(const std::vector<FrameKeypoints>& frames,
                                      double fps) {
    if (fps <= 0.0) throw InvalidParams("fps must be positive");
    KeypointSeries out;
    out.fps = fps;
    if (frames.empty()) return out;
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].frame_index == frames[i - 1].frame_index)
            throw DuplicateFrame("duplicate frame index " +
                                 std::to_string(frames[i].frame_index));
        if (frames[i].frame_index < frames[i - 1].frame_index)
            throw NonMonotonicIndex("frame index " +
                                    std::to_string(frames[i].frame_index) +
                                    " after " +
                                    std::to_string(frames[i - 1].frame_index));
    }
    out.length = static_cast<std::size_t>(frames.back().frame_index) + 1;
    for (int l = 0; l < kFaceLandmarks; ++l) {
        out.x[l].assign(out.length, kMissing);
        out.y[l].assign(out.length, kMissing);
        out.confidence[l].assign(out.length, 0.0);
    }
    for (const auto& f : frames) {
        auto t = static_cast<std::size_t>(f.frame_index);
        for (int l = 0; l < kFaceLandmarks; ++l) {
            out.x[l][t] = f.points[l].x;
            out.y[l][t] = f.points[l].y;
            out.confidence[l][t] = f.points[l].confidence;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// File loaders / writers
// ---------------------------------------------------------------------------

inline std::vector<FrameKeypoints> load_frames_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<FrameKeypoints> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            frames.push_back(parse_frame(line));
        } catch (const MalformedRecord& e) {
            throw MalformedRecord(path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    return frames;
}

inline void write_frames_jsonl(const std::vector<FrameKeypoints>& frames,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    for (const auto& f : frames) out << serialize_frame(f) << '\n';
}

// CSV layout: frame,id,x,y,c with one row per (frame, landmark).
inline std::vector<FrameKeypoints> load_frames_csv(const std::string& path) {
    auto table = csv::read_file(path);
    const std::vector<std::string> want = {"frame", "id", "x", "y", "c"};
    if (table.header != want)
        throw MalformedRecord(path + ": expected header frame,id,x,y,c");
    std::vector<FrameKeypoints> frames;
    std::int64_t current = -1;
    for (const auto& row : table.rows) {
        if (row.size() != 5)
            throw MalformedRecord(path + ": row with " +
                                  std::to_string(row.size()) + " cells");
        auto frame = static_cast<std::int64_t>(csv::parse_number(row[0]));
        auto id = static_cast<int>(csv::parse_number(row[1]));
        if (id < 0 || id >= kFaceLandmarks)
            throw MalformedRecord(path + ": landmark id " + std::to_string(id) +
                                  " outside 0.." + std::to_string(kFaceLandmarks - 1));
        if (frame != current) {
            frames.emplace_back();
            frames.back().frame_index = frame;
            current = frame;
        }
        Keypoint& p = frames.back().points[id];
        p.x = csv::parse_number(row[2]);
        p.y = csv::parse_number(row[3]);
        p.confidence = csv::parse_number(row[4]);
        if (is_missing(p.confidence)) p.confidence = 0.0;
    }
    return frames;
}

// Columnar dump of an assembled series for inspection.
inline void write_series_csv(const KeypointSeries& s, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> header = {"frame"};
    for (int l = 0; l < kFaceLandmarks; ++l) {
        header.push_back("l" + std::to_string(l) + "_x");
        header.push_back("l" + std::to_string(l) + "_y");
        header.push_back("l" + std::to_string(l) + "_c");
    }
    w.row(header);
    for (std::size_t t = 0; t < s.length; ++t) {
        std::vector<std::string> row;
        row.reserve(header.size());
        row.push_back(csv::format_number(static_cast<std::int64_t>(t)));
        for (int l = 0; l < kFaceLandmarks; ++l) {
            row.push_back(csv::format_number(s.x[l][t]));
            row.push_back(csv::format_number(s.y[l][t]));
            row.push_back(csv::format_number(s.confidence[l][t]));
        }
        w.row(row);
    }
}

}  // namespace facedyn
