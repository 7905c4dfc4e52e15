#pragma once

// Small hand-built and randomly generated ensembles shared by the attack and
// oracle test suites.

#include <random>
#include <vector>

#include "treesym/gbdt.hpp"

namespace treesym::testing {

/// One split at 0.5 on the only feature: left leaf scores -1 (class 0),
/// right leaf +1 (class 1). Minimal adversarial distance from x0 = 0.2 is
/// exactly 0.5 - 0.2 because the right branch is closed at the threshold.
inline Ensemble make_stump() {
  Ensemble ens;
  ens.n_features = 1;
  ens.n_classes = 2;
  Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0};
  tree.nodes[1].score = -1.0;
  tree.nodes[2].score = 1.0;
  ens.trees.push_back(tree);
  return ens;
}

inline Ensemble make_constant_classifier(int d) {
  Ensemble ens;
  ens.n_features = d;
  ens.n_classes = 2;
  Tree tree;
  tree.nodes.resize(1);
  tree.nodes[0].score = 1.0;
  ens.trees.push_back(tree);
  return ens;
}

/// Random binary ensemble with up to `max_trees` trees of depth at most
/// `max_depth` over `d` features. Thresholds are uniform in (0.05, 0.95),
/// leaf scores uniform in (-1, 1).
inline Ensemble make_random_toy_ensemble(std::mt19937_64& rng, int d,
                                         int max_trees = 3, int max_depth = 3) {
  std::uniform_int_distribution<int> n_trees_dist(1, max_trees);
  std::uniform_int_distribution<int> feature_dist(0, d - 1);
  std::uniform_real_distribution<double> threshold_dist(0.05, 0.95);
  std::uniform_real_distribution<double> score_dist(-1.0, 1.0);
  std::bernoulli_distribution split_here(0.7);

  Ensemble ens;
  ens.n_features = d;
  ens.n_classes = 2;
  const int n_trees = n_trees_dist(rng);
  for (int t = 0; t < n_trees; ++t) {
    Tree tree;
    // Recursive construction over an explicit stack of (node, depth).
    tree.nodes.push_back(TreeNode{});
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    while (!stack.empty()) {
      auto [node, depth] = stack.back();
      stack.pop_back();
      if (depth < max_depth && split_here(rng)) {
        tree.nodes[node].feature = feature_dist(rng);
        tree.nodes[node].threshold = threshold_dist(rng);
        tree.nodes[node].left = static_cast<int>(tree.nodes.size());
        tree.nodes[node].right = tree.nodes[node].left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        stack.emplace_back(tree.nodes[node].left, depth + 1);
        stack.emplace_back(tree.nodes[node].right, depth + 1);
      } else {
        tree.nodes[node].score = score_dist(rng);
      }
    }
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

inline std::vector<double> random_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(d);
  for (double& v : x) v = unif(rng);
  return x;
}

}  // namespace treesym::testing
