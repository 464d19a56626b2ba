// OpenMATB-style event logs: canonical CSV parsing, the four subtask
// accuracy metrics, reaction times, and analysis-window aggregation.
//
// Canonical schema (header required):  t,subtask,kind,payload
//   tracking  sample    in_target=0|1
//   resman    sample    a_in=0|1;b_in=0|1
//   sysmon    signal    (response expected within 10 s)
//   sysmon    response
//   comms     prompt    own=0|1   (response expected within 15 s)
//   comms     response
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "facedyn/common.hpp"
#include "facedyn/csv.hpp"
#include "facedyn/features.hpp"

namespace facedyn {

enum class Subtask { tracking, resman, sysmon, comms };

inline std::string subtask_name(Subtask s) {
    switch (s) {
        case Subtask::tracking: return "tracking";
        case Subtask::resman: return "resman";
        case Subtask::sysmon: return "sysmon";
        case Subtask::comms: return "comms";
    }
    return "?";
}

struct Event {
    double t = 0.0;  // seconds from scenario onset
    Subtask subtask = Subtask::tracking;
    std::string kind;
    std::map<std::string, double> payload;

    double get(const std::string& key) const {
        auto it = payload.find(key);
        if (it == payload.end())
            throw MalformedRow("event at t=" + csv::format_number(t) +
                               " missing payload key " + key);
        return it->second;
    }
};

inline constexpr double kSysmonDeadline = 10.0;
inline constexpr double kCommsDeadline = 15.0;

inline std::vector<Event> parse_event_log(const std::string& path) {
    csv::Table tbl = csv::read_file(path);
    if (tbl.header != std::vector<std::string>{"t", "subtask", "kind", "payload"})
        throw MalformedRow(path + ": expected header t,subtask,kind,payload");
    std::vector<Event> events;
    events.reserve(tbl.rows.size());
    for (std::size_t r = 0; r < tbl.rows.size(); ++r) {
        const auto& row = tbl.rows[r];
        const std::string where = path + " row " + std::to_string(r + 2);
        if (row.size() != 4) throw MalformedRow(where + ": expected 4 fields");
        Event e;
        e.t = csv::parse_number(row[0]);
        if (e.t < 0.0) throw MalformedRow(where + ": negative timestamp");
        if (row[1] == "tracking") e.subtask = Subtask::tracking;
        else if (row[1] == "resman") e.subtask = Subtask::resman;
        else if (row[1] == "sysmon") e.subtask = Subtask::sysmon;
        else if (row[1] == "comms") e.subtask = Subtask::comms;
        else throw UnknownSubtask(where + ": unknown subtask '" + row[1] + "'");
        e.kind = row[2];
        if (!row[3].empty()) {
            for (const std::string& kv : csv::split(row[3], ';')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw MalformedRow(where + ": bad payload item '" + kv + "'");
                e.payload[kv.substr(0, eq)] = csv::parse_number(kv.substr(eq + 1));
            }
        }
        events.push_back(std::move(e));
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return events;
}

// ---------------------------------------------------------------------------
// Signal-response matching: responses are scanned in time order; each takes
// the earliest unmatched signal whose onset lies within the deadline before
// it. Each response consumes at most one signal and vice versa.
// ---------------------------------------------------------------------------

struct MatchedPair {
    double onset = 0.0;
    double response = 0.0;
    bool own = true;  // comms: whether the matched prompt was an "own" prompt

    double latency() const { return response - onset; }
};

struct MatchResult {
    std::vector<MatchedPair> pairs;
    std::vector<double> unmatched_signals;    // onsets never answered in time
    std::vector<double> unmatched_responses;  // stray responses
};

namespace detail {

struct Onset {
    double t;
    bool own;
    bool matched = false;
};

inline MatchResult match_signal_responses(const std::vector<Event>& events,
                                          Subtask task,
                                          const std::string& signal_kind,
                                          double deadline) {
    std::vector<Onset> onsets;
    std::vector<double> responses;
    for (const Event& e : events) {
        if (e.subtask != task) continue;
        if (e.kind == signal_kind) {
            bool own = true;
            auto it = e.payload.find("own");
            if (it != e.payload.end()) own = it->second != 0.0;
            onsets.push_back({e.t, own});
        } else if (e.kind == "response") {
            responses.push_back(e.t);
        }
    }
    MatchResult res;
    for (double rt : responses) {
        bool matched = false;
        for (Onset& o : onsets) {
            if (o.matched) continue;
            if (o.t > rt) break;  // onsets sorted; later ones can't precede rt
            if (rt - o.t <= deadline) {
                o.matched = true;
                res.pairs.push_back({o.t, rt, o.own});
                matched = true;
                break;
            }
        }
        if (!matched) res.unmatched_responses.push_back(rt);
    }
    for (const Onset& o : onsets)
        if (!o.matched) res.unmatched_signals.push_back(o.t);
    return res;
}

inline bool in_window(double t, double start_s, double end_s) {
    return t >= start_s && t < end_s;
}

}  // namespace detail

// In-target samples / total samples; absent (nullopt) without samples.
inline std::optional<double> tracking_accuracy(const std::vector<Event>& events,
                                               double start_s, double end_s) {
    std::size_t total = 0, in = 0;
    for (const Event& e : events) {
        if (e.subtask != Subtask::tracking || e.kind != "sample") continue;
        if (!detail::in_window(e.t, start_s, end_s)) continue;
        ++total;
        if (e.get("in_target") != 0.0) ++in;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(in) / static_cast<double>(total);
}

// Proportion of samples with both dials in tolerance.
inline std::optional<double> resman_accuracy(const std::vector<Event>& events,
                                             double start_s, double end_s) {
    std::size_t total = 0, in = 0;
    for (const Event& e : events) {
        if (e.subtask != Subtask::resman || e.kind != "sample") continue;
        if (!detail::in_window(e.t, start_s, end_s)) continue;
        ++total;
        if (e.get("a_in") != 0.0 && e.get("b_in") != 0.0) ++in;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(in) / static_cast<double>(total);
}

// (hits - false_alarms) / signals. Hits count in the window of their signal
// onset; false alarms (stray responses) in the window of the response.
inline std::optional<double> sysmon_accuracy(const std::vector<Event>& events,
                                             double start_s, double end_s) {
    const MatchResult m = detail::match_signal_responses(
        events, Subtask::sysmon, "signal", kSysmonDeadline);
    std::size_t signals = 0, hits = 0, fas = 0;
    for (const MatchedPair& p : m.pairs)
        if (detail::in_window(p.onset, start_s, end_s)) {
            ++signals;
            ++hits;
        }
    for (double t : m.unmatched_signals)
        if (detail::in_window(t, start_s, end_s)) ++signals;
    for (double t : m.unmatched_responses)
        if (detail::in_window(t, start_s, end_s)) ++fas;
    if (signals == 0) return std::nullopt;
    return (static_cast<double>(hits) - static_cast<double>(fas)) /
           static_cast<double>(signals);
}

// own hits / own prompts - other responses / other prompts. The subtraction
// term is skipped when the window has no "other" prompts. Stray responses
// matching no prompt are ignored for comms.
inline std::optional<double> comms_accuracy(const std::vector<Event>& events,
                                            double start_s, double end_s) {
    const MatchResult m = detail::match_signal_responses(
        events, Subtask::comms, "prompt", kCommsDeadline);
    std::size_t own = 0, own_hits = 0, other = 0, other_resp = 0;
    for (const MatchedPair& p : m.pairs) {
        if (!detail::in_window(p.onset, start_s, end_s)) continue;
        if (p.own) {
            ++own;
            ++own_hits;
        } else {
            ++other;
            ++other_resp;
        }
    }
    for (const Event& e : events) {
        // Unanswered prompts, classified by their own/other flag.
        if (e.subtask != Subtask::comms || e.kind != "prompt") continue;
        if (!detail::in_window(e.t, start_s, end_s)) continue;
        bool answered = false;
        for (const MatchedPair& p : m.pairs)
            if (p.onset == e.t) {
                answered = true;
                break;
            }
        if (answered) continue;
        if (e.get("own") != 0.0) ++own;
        else ++other;
    }
    if (own == 0) return std::nullopt;
    double acc = static_cast<double>(own_hits) / static_cast<double>(own);
    if (other > 0)
        acc -= static_cast<double>(other_resp) / static_cast<double>(other);
    return acc;
}

struct ReactionTimes {
    std::optional<double> sysmon_rt;
    std::optional<double> comms_rt;  // own prompts only
};

inline ReactionTimes reaction_times(const std::vector<Event>& events,
                                    double start_s, double end_s) {
    ReactionTimes out;
    const MatchResult sm = detail::match_signal_responses(
        events, Subtask::sysmon, "signal", kSysmonDeadline);
    double sum = 0.0;
    std::size_t n = 0;
    for (const MatchedPair& p : sm.pairs)
        if (detail::in_window(p.onset, start_s, end_s)) {
            sum += p.latency();
            ++n;
        }
    if (n > 0) out.sysmon_rt = sum / static_cast<double>(n);

    const MatchResult cm = detail::match_signal_responses(
        events, Subtask::comms, "prompt", kCommsDeadline);
    sum = 0.0;
    n = 0;
    for (const MatchedPair& p : cm.pairs)
        if (p.own && detail::in_window(p.onset, start_s, end_s)) {
            sum += p.latency();
            ++n;
        }
    if (n > 0) out.comms_rt = sum / static_cast<double>(n);
    return out;
}

struct PerfWindow {
    std::size_t window_index = 0;
    double start_s = 0.0;
    // kMissing marks metrics whose preconditions (samples/signals/prompts in
    // the window) were not met.
    double tracking_acc = kMissing;
    double resman_acc = kMissing;
    double sysmon_acc = kMissing;
    double comms_acc = kMissing;
    double sysmon_rt = kMissing;
    double comms_rt = kMissing;
};

inline const std::vector<std::string>& perf_column_names() {
    static const std::vector<std::string> names = {
        "perf__tracking__acc", "perf__resman__acc", "perf__sysmon__acc",
        "perf__comms__acc",    "perf__sysmon__rt",  "perf__comms__rt"};
    return names;
}

// Windows follow the same grid as the frame-domain WindowSpec, expressed in
// seconds; an event at an exact boundary belongs to the later window ([start,
// end) convention).
inline std::vector<PerfWindow> windowed_perf(const std::vector<Event>& events,
                                             const WindowSpec& spec,
                                             double duration_s) {
    const double len = spec.length_s;
    const double hop = static_cast<double>(spec.hop_samples()) / spec.fps;
    if (duration_s + 1e-9 < len)
        throw SeriesTooShort("log shorter than one window");
    std::vector<PerfWindow> out;
    for (std::size_t idx = 0;; ++idx) {
        const double start = static_cast<double>(idx) * hop;
        if (start + len > duration_s + 1e-9) break;
        PerfWindow w;
        w.window_index = idx;
        w.start_s = start;
        const double end = start + len;
        if (auto v = tracking_accuracy(events, start, end)) w.tracking_acc = *v;
        if (auto v = resman_accuracy(events, start, end)) w.resman_acc = *v;
        if (auto v = sysmon_accuracy(events, start, end)) w.sysmon_acc = *v;
        if (auto v = comms_accuracy(events, start, end)) w.comms_acc = *v;
        const ReactionTimes rt = reaction_times(events, start, end);
        if (rt.sysmon_rt) w.sysmon_rt = *rt.sysmon_rt;
        if (rt.comms_rt) w.comms_rt = *rt.comms_rt;
        out.push_back(w);
    }
    return out;
}

}  // namespace facedyn
