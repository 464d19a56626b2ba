// JSON views of harness results and the plain-text summary renderer shared
// by the command-line tool and the integration tests.
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "facedyn/metrics.hpp"
#include "facedyn/ml.hpp"

namespace facedyn {

inline std::string format_percent_pm(const MeanSd& m) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f%% ± %.1f%%", 100.0 * m.mean,
                  100.0 * m.sd);
    return buf;
}

inline nlohmann::json mean_sd_json(const MeanSd& m) {
    return {{"mean", m.mean}, {"sd", m.sd}, {"n", m.n}};
}

inline nlohmann::json eval_report_json(const EvalReport& r) {
    nlohmann::json j;
    j["balanced_accuracy"] = r.balanced_accuracy;
    j["weighted_f1"] = r.weighted_f1;
    j["kappa"] = r.kappa;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["support"] = r.support;
    j["confusion_percent"] = r.confusion;
    return j;
}

inline nlohmann::json split_eval_json(const SplitEvalResult& res,
                                      const std::vector<std::string>& columns) {
    nlohmann::json j;
    j["kind"] = "eval-split";
    j["seeds"] = res.seeds;
    j["balanced_accuracy"] = mean_sd_json(res.balanced_accuracy);
    j["weighted_f1"] = mean_sd_json(res.weighted_f1);
    j["kappa"] = mean_sd_json(res.kappa);
    nlohmann::json sel = nlohmann::json::array();
    for (std::size_t c : res.selected_features) sel.push_back(columns.at(c));
    j["selected_features"] = sel;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : res.per_seed) per.push_back(eval_report_json(r));
    j["per_seed"] = per;
    return j;
}

inline nlohmann::json lopo_json(const LopoResult& res) {
    nlohmann::json j;
    j["kind"] = "eval-lopo";
    j["aggregate"] = mean_sd_json(res.aggregate);
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t p = 0; p < res.participants.size(); ++p) {
        nlohmann::json e;
        e["participant"] = res.participants[p];
        e["balanced_accuracy"] = mean_sd_json(res.per_participant[p]);
        e["first_seed"] = eval_report_json(res.first_seed_report[p]);
        per.push_back(std::move(e));
    }
    j["per_participant"] = per;
    return j;
}

inline nlohmann::json learning_curve_json(const LearningCurveResult& res) {
    nlohmann::json j;
    j["kind"] = "learning-curve";
    j["sizes"] = res.sizes;
    j["participants"] = res.participants;
    nlohmann::json pop = nlohmann::json::array();
    for (const auto& pt : res.population) {
        nlohmann::json e;
        e["size"] = pt.size;
        e["accuracy"] = mean_sd_json(pt.population);
        pop.push_back(std::move(e));
    }
    j["population"] = pop;
    nlohmann::json acc = nlohmann::json::array();
    for (const auto& row : res.accuracy) acc.push_back(row);
    j["per_participant_accuracy"] = acc;
    j["exclusions"] = res.exclusions;
    return j;
}

// Mean ± sd tables; any of the inputs may be null.
inline std::string render_report(const nlohmann::json* split,
                                 const nlohmann::json* lopo,
                                 const nlohmann::json* curve) {
    std::string text;
    auto pm = [](const nlohmann::json& j) {
        MeanSd m;
        m.mean = j.at("mean").get<double>();
        m.sd = j.at("sd").get<double>();
        return format_percent_pm(m);
    };
    if (split) {
        const nlohmann::json& j = *split;
        text += "Random-split evaluation (" +
                std::to_string(j.at("seeds").size()) + " seeds)\n";
        text += "  balanced accuracy  " + pm(j.at("balanced_accuracy")) + "\n";
        text += "  weighted F1        " + pm(j.at("weighted_f1")) + "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f ± %.3f",
                      j.at("kappa").at("mean").get<double>(),
                      j.at("kappa").at("sd").get<double>());
        text += "  Cohen's kappa      " + std::string(buf) + "\n";
        text += "  selected features  " +
                std::to_string(j.at("selected_features").size()) + "\n\n";
    }
    if (lopo) {
        const nlohmann::json& j = *lopo;
        text += "Leave-one-participant-out evaluation\n";
        text += "  balanced accuracy  " + pm(j.at("aggregate")) + "\n";
        for (const auto& e : j.at("per_participant"))
            text += "    " + e.at("participant").get<std::string>() + "  " +
                    pm(e.at("balanced_accuracy")) + "\n";
        text += "\n";
    }
    if (curve) {
        const nlohmann::json& j = *curve;
        text += "Participant-specific learning curve\n";
        for (const auto& e : j.at("population"))
            text += "  size " + std::to_string(e.at("size").get<int>()) + "  " +
                    pm(e.at("accuracy")) + "\n";
        text += "\n";
    }
    return text;
}

}  // namespace facedyn
