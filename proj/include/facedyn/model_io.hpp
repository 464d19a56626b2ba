// JSON persistence for trained classifiers. The format stores the selected
// column names (not indices) so a model can be applied to any matrix that
// carries the same columns, in any order.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facedyn/common.hpp"
#include "facedyn/forest.hpp"
#include "facedyn/ml.hpp"

namespace facedyn {

inline nlohmann::json forest_to_json(const RandomForest& f) {
    nlohmann::json jtrees = nlohmann::json::array();
    for (const DecisionTree& t : f.trees()) {
        nlohmann::json jnodes = nlohmann::json::array();
        for (const auto& n : t.nodes()) {
            nlohmann::json jn;
            jn["f"] = n.feature;
            if (n.feature >= 0) {
                jn["t"] = n.threshold;
                jn["l"] = n.left;
                jn["r"] = n.right;
            } else {
                jn["d"] = n.dist;
            }
            jnodes.push_back(std::move(jn));
        }
        jtrees.push_back(std::move(jnodes));
    }
    nlohmann::json j;
    j["n_classes"] = f.n_classes();
    j["trees"] = std::move(jtrees);
    return j;
}

inline RandomForest forest_from_json(const nlohmann::json& j) {
    const int n_classes = j.at("n_classes").get<int>();
    std::vector<DecisionTree> trees;
    for (const auto& jnodes : j.at("trees")) {
        std::vector<DecisionTree::Node> nodes;
        for (const auto& jn : jnodes) {
            DecisionTree::Node n;
            n.feature = jn.at("f").get<int>();
            if (n.feature >= 0) {
                n.threshold = jn.at("t").get<double>();
                n.left = jn.at("l").get<std::int32_t>();
                n.right = jn.at("r").get<std::int32_t>();
            } else {
                n.dist = jn.at("d").get<std::vector<double>>();
            }
            nodes.push_back(std::move(n));
        }
        trees.push_back(DecisionTree::from_nodes(std::move(nodes), n_classes));
    }
    return RandomForest::from_trees(std::move(trees), n_classes);
}

inline nlohmann::json model_to_json(const TrainedModel& m,
                                    const std::vector<std::string>& columns) {
    nlohmann::json j;
    std::vector<std::string> names;
    names.reserve(m.features.size());
    for (std::size_t c : m.features) names.push_back(columns.at(c));
    j["features"] = names;
    j["mu"] = m.mu;
    j["sigma"] = m.sigma;
    j["forest"] = forest_to_json(m.forest);
    return j;
}

// Column indices are re-resolved against the given matrix columns.
inline TrainedModel model_from_json(const nlohmann::json& j,
                                    const std::vector<std::string>& columns) {
    TrainedModel m;
    for (const auto& name : j.at("features")) {
        const auto it =
            std::find(columns.begin(), columns.end(), name.get<std::string>());
        if (it == columns.end())
            throw InvalidParams("model feature " + name.get<std::string>() +
                                " missing from matrix");
        m.features.push_back(
            static_cast<std::size_t>(it - columns.begin()));
    }
    m.mu = j.at("mu").get<std::vector<double>>();
    m.sigma = j.at("sigma").get<std::vector<double>>();
    m.forest = forest_from_json(j.at("forest"));
    m.n_classes = m.forest.n_classes();
    if (m.mu.size() != m.features.size() || m.sigma.size() != m.features.size())
        throw InvalidParams("model scaler/feature arity mismatch");
    return m;
}

inline void save_model(const TrainedModel& m,
                       const std::vector<std::string>& columns,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << model_to_json(m, columns).dump(2) << "\n";
}

inline TrainedModel load_model(const std::string& path,
                               const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return model_from_json(j, columns);
}

}  // namespace facedyn
