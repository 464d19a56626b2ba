// Event-log parsing, signal-response matching, windowed performance metrics.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "facedyn/features.hpp"
#include "facedyn/synth.hpp"
#include "facedyn/taskperf.hpp"

using namespace facedyn;

namespace {

Event ev(double t, Subtask s, const std::string& kind,
         std::map<std::string, double> payload = {}) {
    Event e;
    e.t = t;
    e.subtask = s;
    e.kind = kind;
    e.payload = std::move(payload);
    return e;
}

std::string write_log(const std::string& name, const std::string& body) {
    auto dir = std::filesystem::temp_directory_path() / "facedyn_perf";
    std::filesystem::create_directories(dir);
    auto path = (dir / name).string();
    std::ofstream out(path);
    out << "t,subtask,kind,payload\n" << body;
    return path;
}

}  // namespace

TEST_CASE("a header-only log parses to no events", "[taskperf]") {
    auto path = write_log("empty.csv", "");
    REQUIRE(parse_event_log(path).empty());
}

TEST_CASE("rows come back sorted by time", "[taskperf]") {
    auto path = write_log("order.csv",
                          "5,tracking,sample,in_target=1\n"
                          "1,sysmon,signal,\n"
                          "3,comms,prompt,own=1\n");
    auto events = parse_event_log(path);
    REQUIRE(events.size() == 3);
    REQUIRE(events[0].t == 1.0);
    REQUIRE(events[1].t == 3.0);
    REQUIRE(events[2].t == 5.0);
    REQUIRE(events[0].subtask == Subtask::sysmon);
    REQUIRE(events[2].get("in_target") == 1.0);
}

TEST_CASE("bad rows name their position", "[taskperf]") {
    auto unknown = write_log("unknown.csv",
                             "1,tracking,sample,in_target=1\n"
                             "2,juggling,sample,\n");
    try {
        parse_event_log(unknown);
        FAIL("expected UnknownSubtask");
    } catch (const UnknownSubtask& e) {
        // File line numbers: the header is line 1.
        REQUIRE(std::string(e.what()).find("row 3") != std::string::npos);
        REQUIRE(std::string(e.what()).find("juggling") != std::string::npos);
    }

    auto negative = write_log("negative.csv", "-1,tracking,sample,in_target=1\n");
    REQUIRE_THROWS_AS(parse_event_log(negative), MalformedRow);
    auto noval = write_log("noval.csv", "1,tracking,sample,in_target\n");
    REQUIRE_THROWS_AS(parse_event_log(noval), MalformedRow);
    auto short_row = write_log("short.csv", "1,tracking,sample\n");
    REQUIRE_THROWS_AS(parse_event_log(short_row), MalformedRow);
}

TEST_CASE("tracking accuracy is the in-target fraction", "[taskperf]") {
    std::vector<Event> events;
    for (int k = 0; k < 4; ++k)
        events.push_back(ev(k, Subtask::tracking, "sample",
                            {{"in_target", k < 3 ? 1.0 : 0.0}}));
    auto acc = tracking_accuracy(events, 0.0, 10.0);
    REQUIRE(acc.has_value());
    REQUIRE(*acc == 0.75);
    REQUIRE_FALSE(tracking_accuracy(events, 20.0, 30.0).has_value());
}

TEST_CASE("resman accuracy needs both tanks inside the band", "[taskperf]") {
    std::vector<Event> events;
    events.push_back(ev(0, Subtask::resman, "sample", {{"a_in", 1}, {"b_in", 1}}));
    events.push_back(ev(1, Subtask::resman, "sample", {{"a_in", 1}, {"b_in", 0}}));
    auto acc = resman_accuracy(events, 0.0, 10.0);
    REQUIRE(*acc == 0.5);

    std::vector<Event> one;
    one.push_back(ev(0, Subtask::resman, "sample", {{"a_in", 1}, {"b_in", 0}}));
    REQUIRE(*resman_accuracy(one, 0.0, 10.0) == 0.0);
}

TEST_CASE("sysmon accuracy rewards hits and penalizes stray responses", "[taskperf]") {
    std::vector<Event> perfect;
    for (int k = 0; k < 5; ++k) {
        perfect.push_back(ev(10.0 * k, Subtask::sysmon, "signal"));
        perfect.push_back(ev(10.0 * k + 1.0, Subtask::sysmon, "response"));
    }
    REQUIRE(*sysmon_accuracy(perfect, 0.0, 100.0) == 1.0);

    // Five missed signals and two strays placed before any signal.
    std::vector<Event> bad;
    bad.push_back(ev(0.5, Subtask::sysmon, "response"));
    bad.push_back(ev(1.0, Subtask::sysmon, "response"));
    for (int k = 0; k < 5; ++k)
        bad.push_back(ev(2.0 + 10.0 * k, Subtask::sysmon, "signal"));
    REQUIRE(*sysmon_accuracy(bad, 0.0, 100.0) == Catch::Approx(-0.4).margin(1e-15));

    std::vector<Event> none;
    none.push_back(ev(1.0, Subtask::sysmon, "response"));
    REQUIRE_FALSE(sysmon_accuracy(none, 0.0, 100.0).has_value());
}

TEST_CASE("responses claim the earliest unanswered onset in range", "[taskperf]") {
    std::vector<Event> events;
    events.push_back(ev(0.0, Subtask::sysmon, "signal"));
    events.push_back(ev(4.0, Subtask::sysmon, "signal"));
    events.push_back(ev(5.0, Subtask::sysmon, "response"));
    events.push_back(ev(6.0, Subtask::sysmon, "response"));
    auto m = detail::match_signal_responses(events, Subtask::sysmon, "signal",
                                            kSysmonDeadline);
    REQUIRE(m.pairs.size() == 2);
    REQUIRE(m.pairs[0].onset == 0.0);
    REQUIRE(m.pairs[0].response == 5.0);
    REQUIRE(m.pairs[1].onset == 4.0);
    REQUIRE(m.unmatched_responses.empty());
    REQUIRE(m.unmatched_signals.empty());
}

TEST_CASE("comms accuracy separates own and other prompts", "[taskperf]") {
    // Blocks spaced past the deadline so responses cannot drift onto the
    // previous block's unanswered other-callsign prompt.
    std::vector<Event> events;
    for (int k = 0; k < 4; ++k) {
        events.push_back(ev(10.0 + 40.0 * k, Subtask::comms, "prompt", {{"own", 1}}));
        events.push_back(ev(11.0 + 40.0 * k, Subtask::comms, "response"));
        events.push_back(ev(20.0 + 40.0 * k, Subtask::comms, "prompt", {{"own", 0}}));
    }
    REQUIRE(*comms_accuracy(events, 0.0, 200.0) == 1.0);

    // Answering an other-callsign prompt costs credit.
    std::vector<Event> leaky = events;
    leaky.push_back(ev(20.5, Subtask::comms, "response"));
    REQUIRE(*comms_accuracy(leaky, 0.0, 200.0) == Catch::Approx(1.0 - 0.25).margin(1e-15));

    std::vector<Event> other_only;
    other_only.push_back(ev(1.0, Subtask::comms, "prompt", {{"own", 0}}));
    REQUIRE_FALSE(comms_accuracy(other_only, 0.0, 200.0).has_value());
}

TEST_CASE("responses after the deadline never match", "[taskperf]") {
    std::vector<Event> events;
    events.push_back(ev(10.0, Subtask::comms, "prompt", {{"own", 1}}));
    events.push_back(ev(25.01, Subtask::comms, "response"));
    REQUIRE(*comms_accuracy(events, 0.0, 100.0) == 0.0);

    std::vector<Event> edge;
    edge.push_back(ev(10.0, Subtask::comms, "prompt", {{"own", 1}}));
    edge.push_back(ev(25.0, Subtask::comms, "response"));
    REQUIRE(*comms_accuracy(edge, 0.0, 100.0) == 1.0);

    std::vector<Event> sm;
    sm.push_back(ev(10.0, Subtask::sysmon, "signal"));
    sm.push_back(ev(20.01, Subtask::sysmon, "response"));
    auto m = detail::match_signal_responses(sm, Subtask::sysmon, "signal",
                                            kSysmonDeadline);
    REQUIRE(m.pairs.empty());
    REQUIRE(m.unmatched_signals.size() == 1);
    REQUIRE(m.unmatched_responses.size() == 1);
}

TEST_CASE("reaction times average matched latencies in the window", "[taskperf]") {
    std::vector<Event> events;
    events.push_back(ev(10.0, Subtask::sysmon, "signal"));
    events.push_back(ev(11.2, Subtask::sysmon, "response"));
    auto rt = reaction_times(events, 0.0, 60.0);
    REQUIRE(rt.sysmon_rt.has_value());
    REQUIRE(*rt.sysmon_rt == Catch::Approx(1.2).margin(1e-12));
    REQUIRE_FALSE(rt.comms_rt.has_value());

    events.push_back(ev(20.0, Subtask::comms, "prompt", {{"own", 1}}));
    events.push_back(ev(22.0, Subtask::comms, "response"));
    events.push_back(ev(30.0, Subtask::comms, "prompt", {{"own", 0}}));
    events.push_back(ev(31.0, Subtask::comms, "response"));
    auto rt2 = reaction_times(events, 0.0, 60.0);
    // Own prompts only: the other-prompt pair is excluded from the mean.
    REQUIRE(*rt2.comms_rt == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("a boundary event belongs to the later window", "[taskperf]") {
    std::vector<Event> events;
    events.push_back(ev(60.0, Subtask::tracking, "sample", {{"in_target", 1}}));
    REQUIRE_FALSE(tracking_accuracy(events, 0.0, 60.0).has_value());
    REQUIRE(tracking_accuracy(events, 60.0, 120.0).has_value());
}

TEST_CASE("disjoint windows account for every sample", "[taskperf]") {
    synth::EventLogConfig cfg;
    cfg.duration_s = 120.0;
    cfg.sysmon_period_s = 10.0;
    cfg.comms_period_s = 15.0;
    cfg.difficulty = 0.4;
    cfg.seed = 99;
    auto events = synth::gen_event_log(cfg);

    WindowSpec spec;
    spec.length_s = 30.0;
    spec.overlap = 0.0;
    spec.fps = 60.0;
    auto windows = windowed_perf(events, spec, 120.0);
    REQUIRE(windows.size() == 4);

    // Tracking in-target counts per window sum to the whole-log count.
    double whole = 0.0, split = 0.0;
    std::size_t total_samples = 0;
    for (const Event& e : events)
        if (e.subtask == Subtask::tracking) ++total_samples;
    whole = *tracking_accuracy(events, 0.0, 120.0) * static_cast<double>(total_samples);
    for (const auto& w : windows) {
        std::size_t in_w = 0;
        for (const Event& e : events)
            if (e.subtask == Subtask::tracking &&
                detail::in_window(e.t, w.start_s, w.start_s + 30.0))
                ++in_w;
        REQUIRE_FALSE(is_missing(w.tracking_acc));
        split += w.tracking_acc * static_cast<double>(in_w);
    }
    REQUIRE(split == Catch::Approx(whole).margin(1e-9));

    // Matched sysmon pairs windowed by onset also partition.
    auto m = detail::match_signal_responses(events, Subtask::sysmon, "signal",
                                            kSysmonDeadline);
    std::size_t pair_total = 0;
    for (const auto& w : windows)
        for (const auto& p : m.pairs)
            if (detail::in_window(p.onset, w.start_s, w.start_s + 30.0))
                ++pair_total;
    REQUIRE(pair_total == m.pairs.size());
}

TEST_CASE("windowed metrics stay within their documented bounds", "[taskperf]") {
    synth::EventLogConfig cfg;
    cfg.duration_s = 300.0;
    cfg.difficulty = 0.7;
    cfg.seed = 7;
    auto events = synth::gen_event_log(cfg);
    WindowSpec spec;
    spec.length_s = 60.0;
    spec.overlap = 0.5;
    spec.fps = 60.0;
    auto windows = windowed_perf(events, spec, 300.0);
    REQUIRE(windows.size() == 9);
    for (const auto& w : windows) {
        if (!is_missing(w.tracking_acc)) {
            REQUIRE(w.tracking_acc >= 0.0);
            REQUIRE(w.tracking_acc <= 1.0);
        }
        if (!is_missing(w.resman_acc)) {
            REQUIRE(w.resman_acc >= 0.0);
            REQUIRE(w.resman_acc <= 1.0);
        }
        if (!is_missing(w.sysmon_acc)) {
            REQUIRE(w.sysmon_acc >= -1.0);
            REQUIRE(w.sysmon_acc <= 1.0);
        }
        if (!is_missing(w.comms_acc)) {
            REQUIRE(w.comms_acc >= -1.0);
            REQUIRE(w.comms_acc <= 1.0);
        }
        if (!is_missing(w.sysmon_rt)) REQUIRE(w.sysmon_rt > 0.0);
    }
    REQUIRE_THROWS_AS(windowed_perf(events, spec, 30.0), SeriesTooShort);
}

TEST_CASE("perf columns carry the canonical names", "[taskperf]") {
    auto names = perf_column_names();
    REQUIRE(names.size() == 6);
    REQUIRE(names[0] == "perf__tracking__acc");
    REQUIRE(names[5] == "perf__comms__rt");
}
