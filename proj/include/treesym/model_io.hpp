#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "treesym/gbdt.hpp"

namespace treesym {

namespace detail {

inline nlohmann::ordered_json tree_to_json(const Tree& tree) {
  nlohmann::ordered_json jt;
  jt["class_index"] = tree.class_index;
  auto& nodes = jt["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const TreeNode& n = tree.nodes[id];
    nlohmann::ordered_json jn;
    jn["id"] = id;
    if (n.is_leaf()) {
      jn["kind"] = "leaf";
      jn["score"] = n.score;
    } else {
      jn["kind"] = "split";
      jn["feature"] = n.feature;
      jn["threshold"] = n.threshold;
      jn["left"] = n.left;
      jn["right"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  return jt;
}

inline Tree tree_from_json(const nlohmann::json& jt, int n_features) {
  if (!jt.contains("class_index") || !jt.contains("nodes")) {
    throw std::runtime_error("model schema error: tree missing class_index or nodes");
  }
  Tree tree;
  tree.class_index = jt.at("class_index").get<int>();
  const auto& nodes = jt.at("nodes");
  if (!nodes.is_array() || nodes.empty()) {
    throw std::runtime_error("model schema error: tree nodes must be a non-empty array");
  }
  tree.nodes.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& jn = nodes[i];
    if (jn.at("id").get<std::size_t>() != i) {
      throw std::runtime_error("model schema error: node ids must be dense and ordered");
    }
    const std::string kind = jn.at("kind").get<std::string>();
    TreeNode n;
    if (kind == "leaf") {
      n.score = jn.at("score").get<double>();
      if (!std::isfinite(n.score)) {
        throw std::runtime_error("model schema error: non-finite leaf score");
      }
    } else if (kind == "split") {
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      if (n.feature < 0 || n.feature >= n_features) {
        throw std::runtime_error("model schema error: split feature out of range");
      }
      if (n.left <= 0 || n.right <= 0 ||
          n.left >= static_cast<int>(nodes.size()) ||
          n.right >= static_cast<int>(nodes.size())) {
        throw std::runtime_error("model schema error: child id out of range");
      }
    } else {
      throw std::runtime_error("model schema error: unknown node kind '" + kind + "'");
    }
    tree.nodes[i] = n;
  }
  return tree;
}

}  // namespace detail

inline nlohmann::ordered_json ensemble_to_json(const Ensemble& ens) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["objective"] = to_string(ens.objective);
  j["n_classes"] = ens.n_classes;
  j["n_features"] = ens.n_features;
  j["base_score"] = ens.base_score;
  j["normalizer"]["mins"] = ens.normalizer.per_feature_min;
  j["normalizer"]["maxs"] = ens.normalizer.per_feature_max;
  auto& trees = j["trees"] = nlohmann::ordered_json::array();
  for (const Tree& t : ens.trees) trees.push_back(detail::tree_to_json(t));
  return j;
}

inline Ensemble ensemble_from_json(const nlohmann::json& j) {
  for (const char* field :
       {"format_version", "objective", "n_classes", "n_features", "base_score", "trees"}) {
    if (!j.contains(field)) {
      throw std::runtime_error(std::string("model schema error: missing '") + field + "'");
    }
  }
  Ensemble ens;
  const std::string obj = j.at("objective").get<std::string>();
  if (obj == "binary-logistic") {
    ens.objective = Objective::BinaryLogistic;
  } else if (obj == "softmax") {
    ens.objective = Objective::Softmax;
  } else {
    throw std::runtime_error("model schema error: unknown objective '" + obj + "'");
  }
  ens.n_classes = j.at("n_classes").get<int>();
  ens.n_features = j.at("n_features").get<int>();
  ens.base_score = j.at("base_score").get<double>();
  if (ens.n_classes < 2 || ens.n_features <= 0) {
    throw std::runtime_error("model schema error: invalid n_classes or n_features");
  }
  if (j.contains("normalizer")) {
    ens.normalizer.per_feature_min =
        j.at("normalizer").at("mins").get<std::vector<double>>();
    ens.normalizer.per_feature_max =
        j.at("normalizer").at("maxs").get<std::vector<double>>();
    const std::size_t n_min = ens.normalizer.per_feature_min.size();
    const std::size_t n_max = ens.normalizer.per_feature_max.size();
    // Models may be saved without normalization statistics (empty arrays).
    if (n_min != n_max ||
        (n_min != 0 && static_cast<int>(n_min) != ens.n_features)) {
      throw std::runtime_error("model schema error: normalizer length mismatch");
    }
  }
  for (const auto& jt : j.at("trees")) {
    ens.trees.push_back(detail::tree_from_json(jt, ens.n_features));
  }
  if (ens.objective == Objective::Softmax) {
    for (std::size_t i = 0; i < ens.trees.size(); ++i) {
      if (ens.trees[i].class_index != static_cast<int>(i) % ens.n_classes) {
        throw std::runtime_error("model schema error: softmax trees must be round-major");
      }
    }
  }
  return ens;
}

/// Human-readable structured text; doubles survive the round trip bit-exactly.
inline std::string serialize(const Ensemble& ens) {
  return ensemble_to_json(ens).dump(2) + "\n";
}

inline Ensemble deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model schema error: ") + e.what());
  }
  try {
    return ensemble_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model schema error: ") + e.what());
  }
}

inline void save_model(const Ensemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot write '" + path + "'");
  out << serialize(ens);
}

inline Ensemble load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace treesym
