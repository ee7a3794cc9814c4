#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atucker/errors.hpp"
#include "atucker/selector.hpp"

namespace atucker::selector {

/// Serializes a model to its canonical JSON form: nlohmann's ordered keys and
/// shortest round-trip float formatting make two saves of one model
/// byte-identical.
inline nlohmann::json model_to_json(const DecisionTreeModel& model) {
    nlohmann::json j;
    j["version"] = 1;
    j["feature_order"] = kFeatureNames;
    j["hyper"] = {{"max_depth", model.max_depth},
                  {"class_weight", model.class_weight},
                  {"cv_folds", model.cv_folds},
                  {"seed", model.seed}};
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t id = 0; id < model.nodes.size(); ++id) {
        const DecisionTreeModel::Node& n = model.nodes[id];
        nlohmann::json jn;
        jn["id"] = id;
        if (n.leaf) {
            jn["label"] = n.label;
            jn["class_counts"] = n.class_counts;
        } else {
            jn["feature_index"] = n.feature_index;
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
            jn["class_counts"] = n.class_counts;
        }
        nodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(nodes);
    j["root"] = model.root;
    j["metadata"] = {{"max_depth", model.max_depth},
                     {"train_accuracy", model.train_accuracy},
                     {"cv_accuracy", model.cv_accuracy},
                     {"feature_order_version", model.feature_order_version},
                     {"degenerate_labels", model.degenerate_labels}};
    return j;
}

inline DecisionTreeModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != 1)
        throw SchemaMismatch("unsupported model file version");
    if (!j.contains("feature_order") || j["feature_order"].size() != kFeatureNames.size())
        throw SchemaMismatch("model feature order does not match this build");
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
        if (j["feature_order"][i].get<std::string>() != kFeatureNames[i])
            throw SchemaMismatch("model feature order does not match this build");
    }

    DecisionTreeModel model;
    const nlohmann::json& meta = j.at("metadata");
    model.feature_order_version = meta.at("feature_order_version").get<int>();
    if (model.feature_order_version != kFeatureOrderVersion)
        throw SchemaMismatch("model feature_order_version " +
                             std::to_string(model.feature_order_version) + " is not supported");
    model.max_depth = meta.at("max_depth").get<int>();
    model.train_accuracy = meta.at("train_accuracy").get<double>();
    model.cv_accuracy = meta.value("cv_accuracy", 0.0);
    model.degenerate_labels = meta.value("degenerate_labels", false);

    const nlohmann::json& hyper = j.at("hyper");
    model.class_weight = hyper.value("class_weight", "uniform");
    model.cv_folds = hyper.value("cv_folds", 0);
    model.seed = hyper.value("seed", std::uint64_t{0});

    const nlohmann::json& nodes = j.at("nodes");
    model.nodes.resize(nodes.size());
    for (const nlohmann::json& jn : nodes) {
        const std::size_t id = jn.at("id").get<std::size_t>();
        if (id >= model.nodes.size()) throw SchemaMismatch("node id out of range");
        DecisionTreeModel::Node n;
        if (jn.contains("feature_index")) {
            n.feature_index = jn.at("feature_index").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
            if (n.feature_index < 0 || n.feature_index >= 10)
                throw SchemaMismatch("node feature index out of range");
        } else {
            n.leaf = true;
            n.label = jn.at("label").get<int>();
            if (n.label != 0 && n.label != 1) throw SchemaMismatch("leaf label must be 0 or 1");
        }
        if (jn.contains("class_counts")) {
            n.class_counts[0] = jn["class_counts"].at(0).get<long long>();
            n.class_counts[1] = jn["class_counts"].at(1).get<long long>();
        }
        model.nodes[id] = n;
    }
    model.root = j.at("root").get<int>();

    // Validate: every path from the root reaches a leaf without revisiting.
    if (model.root < 0 || model.root >= static_cast<int>(model.nodes.size()))
        throw SchemaMismatch("root id out of range");
    std::vector<char> seen(model.nodes.size(), 0);
    std::vector<int> stack{model.root};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (id < 0 || id >= static_cast<int>(model.nodes.size()))
            throw SchemaMismatch("node child id out of range");
        if (seen[static_cast<std::size_t>(id)]) throw SchemaMismatch("decision tree is not acyclic");
        seen[static_cast<std::size_t>(id)] = 1;
        const DecisionTreeModel::Node& n = model.nodes[static_cast<std::size_t>(id)];
        if (!n.leaf) {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    return model;
}

inline void save_model(const DecisionTreeModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw IoFailure("failed writing " + path);
}

inline DecisionTreeModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch("malformed model file " + path + ": " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch("malformed model file " + path + ": " + e.what());
    }
}

}  // namespace atucker::selector
