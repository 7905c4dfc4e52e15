#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesym/dataset.hpp"

namespace treesym {

/// Binary tree stored as a node array, root at index 0. Internal nodes route
/// v < threshold to `left` and v >= threshold to `right`; the equality case
/// always belongs to the right branch.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double score = 0.0;

  bool is_leaf() const { return left < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
  int class_index = 0;
};

enum class Objective { BinaryLogistic, Softmax };

inline const char* to_string(Objective o) {
  return o == Objective::BinaryLogistic ? "binary-logistic" : "softmax";
}

struct Ensemble {
  std::vector<Tree> trees;
  int n_classes = 2;
  int n_features = 0;
  Objective objective = Objective::BinaryLogistic;
  double base_score = 0.0;
  NormalizationSpec normalizer;
};

struct TrainConfig {
  int n_rounds = 1;          // boosting rounds = trees per class
  int max_depth = 6;
  double eta = 0.3;          // shrinkage applied to leaf weights
  double lambda = 1.0;       // L2 leaf regularization
  double gamma = 0.0;        // minimum gain to accept a split
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;    // carried for reproducibility bookkeeping; the
                             // exact greedy build itself is deterministic
};

/// Per-round total training loss, loss[0] being the constant-margin baseline.
struct TrainTrace {
  std::vector<double> loss_per_round;
};

inline int route_leaf_index(const Tree& tree, const double* x) {
  int node = 0;
  while (!tree.nodes[node].is_leaf()) {
    const TreeNode& n = tree.nodes[node];
    node = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return node;
}

inline const TreeNode& route(const Tree& tree, const std::vector<double>& x) {
  return tree.nodes[route_leaf_index(tree, x.data())];
}

inline void predict_margin_into(const Ensemble& ens, const double* x,
                                std::vector<double>& margins) {
  margins.assign(ens.n_classes, ens.base_score);
  for (const Tree& t : ens.trees) {
    margins[t.class_index] += t.nodes[route_leaf_index(t, x)].score;
  }
}

inline std::vector<double> predict_margin(const Ensemble& ens,
                                          const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != ens.n_features) {
    throw std::invalid_argument("predict_margin: dimension mismatch");
  }
  std::vector<double> margins;
  predict_margin_into(ens, x.data(), margins);
  return margins;
}

inline int label_from_margins(const Ensemble& ens,
                              const std::vector<double>& margins) {
  if (ens.objective == Objective::BinaryLogistic) {
    // sigmoid(m) >= 0.5 exactly when m >= 0; equality goes to class 1,
    // mirroring the right-branch equality convention.
    return margins[0] >= 0.0 ? 1 : 0;
  }
  int best = 0;
  for (int k = 1; k < ens.n_classes; ++k) {
    if (margins[k] > margins[best]) best = k;  // ties keep the lowest index
  }
  return best;
}

inline int predict_label(const Ensemble& ens, const std::vector<double>& x) {
  return label_from_margins(ens, predict_margin(ens, x));
}

inline std::int64_t count_split_conditions(const Ensemble& ens) {
  std::int64_t count = 0;
  for (const Tree& t : ens.trees) {
    for (const TreeNode& n : t.nodes) {
      if (!n.is_leaf()) ++count;
    }
  }
  return count;
}

/// Distinct split thresholds per feature, ascending.
inline std::map<int, std::vector<double>> thresholds_per_feature(
    const Ensemble& ens) {
  std::map<int, std::vector<double>> out;
  for (const Tree& t : ens.trees) {
    for (const TreeNode& n : t.nodes) {
      if (!n.is_leaf()) out[n.feature].push_back(n.threshold);
    }
  }
  for (auto& [f, ts] : out) {
    (void)f;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  }
  return out;
}

namespace detail {

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool valid() const { return feature >= 0; }
};

/// One boosting tree fitted to (g, h) by exact greedy search. Rows are
/// dispatched through a row->node map so each level costs one pass over the
/// presorted columns; candidate thresholds are midpoints of consecutive
/// distinct values within a node.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data,
              const std::vector<std::vector<int>>& sorted_columns,
              const TrainConfig& cfg)
      : data_(data), sorted_columns_(sorted_columns), cfg_(cfg) {}

  Tree build(const std::vector<double>& grad, const std::vector<double>& hess,
             int class_index) {
    const std::size_t n = data_.n_rows();
    Tree tree;
    tree.class_index = class_index;
    tree.nodes.push_back(TreeNode{});

    row_node_.assign(n, 0);
    std::vector<int> level_nodes = {0};

    for (int depth = 0; depth < cfg_.max_depth && !level_nodes.empty(); ++depth) {
      const auto choices = find_best_splits(level_nodes, grad, hess);
      std::vector<int> next_level;
      std::vector<int> left_child(tree.nodes.size(), -1);
      for (std::size_t j = 0; j < level_nodes.size(); ++j) {
        const int node = level_nodes[j];
        const SplitChoice& c = choices[j];
        if (!c.valid()) continue;  // stays a leaf; weight filled below
        TreeNode& parent = tree.nodes[node];
        parent.feature = c.feature;
        parent.threshold = c.threshold;
        parent.left = static_cast<int>(tree.nodes.size());
        parent.right = parent.left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        left_child[node] = parent.left;
        next_level.push_back(parent.left);
        next_level.push_back(parent.right);
      }
      // Reassign rows that live in a node split this level.
      for (std::size_t i = 0; i < n; ++i) {
        const int node = row_node_[i];
        if (node >= static_cast<int>(left_child.size()) || left_child[node] < 0) continue;
        const TreeNode& p = tree.nodes[node];
        row_node_[i] = data_.row(i)[p.feature] < p.threshold ? p.left : p.right;
      }
      level_nodes = std::move(next_level);
    }

    fill_leaf_weights(tree, grad, hess);
    return tree;
  }

 private:
  std::vector<SplitChoice> find_best_splits(const std::vector<int>& level_nodes,
                                            const std::vector<double>& grad,
                                            const std::vector<double>& hess) {
    const int max_node = 1 + *std::max_element(level_nodes.begin(), level_nodes.end());
    std::vector<int> slot(max_node, -1);
    for (std::size_t j = 0; j < level_nodes.size(); ++j) slot[level_nodes[j]] = static_cast<int>(j);

    struct Totals { double g = 0.0, h = 0.0; };
    std::vector<Totals> totals(level_nodes.size());
    for (std::size_t i = 0; i < data_.n_rows(); ++i) {
      const int node = row_node_[i];
      if (node < max_node && slot[node] >= 0) {
        totals[slot[node]].g += grad[i];
        totals[slot[node]].h += hess[i];
      }
    }

    std::vector<SplitChoice> best(level_nodes.size());
    struct Scan {
      double gl = 0.0, hl = 0.0;
      double prev = 0.0;
      bool has_prev = false;
    };
    std::vector<Scan> scans(level_nodes.size());

    for (int f = 0; f < data_.n_features; ++f) {
      for (Scan& s : scans) s = Scan{};
      for (const int i : sorted_columns_[f]) {
        const int node = row_node_[i];
        if (node >= max_node || slot[node] < 0) continue;
        const int j = slot[node];
        Scan& s = scans[j];
        const double v = data_.row(i)[f];
        if (s.has_prev && v != s.prev) {
          const double t = s.prev + (v - s.prev) / 2.0;
          if (t > s.prev) {  // guard against midpoint rounding onto prev
            consider(best[j], totals[j].g, totals[j].h, s.gl, s.hl, f, t);
          }
        }
        s.gl += grad[i];
        s.hl += hess[i];
        s.prev = v;
        s.has_prev = true;
      }
    }
    return best;
  }

  void consider(SplitChoice& best, double g_total, double h_total, double gl,
                double hl, int feature, double threshold) const {
    const double gr = g_total - gl;
    const double hr = h_total - hl;
    if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) return;
    const double lam = cfg_.lambda;
    const double gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) -
                               g_total * g_total / (h_total + lam)) -
                        cfg_.gamma;
    if (gain <= 0.0) return;
    if (gain > best.gain) {
      best.gain = gain;
      best.feature = feature;
      best.threshold = threshold;
    }
  }

  void fill_leaf_weights(Tree& tree, const std::vector<double>& grad,
                         const std::vector<double>& hess) {
    std::vector<double> g_sum(tree.nodes.size(), 0.0);
    std::vector<double> h_sum(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < data_.n_rows(); ++i) {
      // Rows split at the last level still carry the parent id; finish routing.
      int node = row_node_[i];
      const double* x = data_.row(i);
      while (!tree.nodes[node].is_leaf()) {
        const TreeNode& p = tree.nodes[node];
        node = x[p.feature] < p.threshold ? p.left : p.right;
      }
      g_sum[node] += grad[i];
      h_sum[node] += hess[i];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].is_leaf()) {
        tree.nodes[k].score = -cfg_.eta * g_sum[k] / (h_sum[k] + cfg_.lambda);
      }
    }
  }

  const Dataset& data_;
  const std::vector<std::vector<int>>& sorted_columns_;
  const TrainConfig& cfg_;
  std::vector<int> row_node_;
};

}  // namespace detail

/// Second-order boosting with exact greedy splits. Binary targets use the
/// logistic objective with one tree per round; multiclass targets use softmax
/// with one tree per class per round, round-major.
inline Ensemble train(const Dataset& data, const TrainConfig& cfg,
                      TrainTrace* trace = nullptr) {
  const std::size_t n = data.n_rows();
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.n_rounds < 1) throw std::invalid_argument("train: n_rounds must be >= 1");
  if (cfg.max_depth < 1) throw std::invalid_argument("train: max_depth must be >= 1");
  if (cfg.eta <= 0.0 || cfg.lambda <= 0.0 || cfg.min_child_weight <= 0.0 ||
      cfg.gamma < 0.0) {
    throw std::invalid_argument(
        "train: eta, lambda and min_child_weight must be positive, gamma >= 0");
  }
  if (data.n_classes < 2) throw std::invalid_argument("train: need at least 2 classes");
  for (int y : data.labels) {
    if (y < 0 || y >= data.n_classes) {
      throw std::invalid_argument("train: label outside [0, n_classes)");
    }
  }

  Ensemble ens;
  ens.n_classes = data.n_classes;
  ens.n_features = data.n_features;
  ens.objective = data.n_classes == 2 ? Objective::BinaryLogistic : Objective::Softmax;
  ens.base_score = 0.0;

  // Column presort, shared by every tree of this run.
  std::vector<std::vector<int>> sorted_columns(data.n_features);
  for (int f = 0; f < data.n_features; ++f) {
    auto& idx = sorted_columns[f];
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return data.row(a)[f] < data.row(b)[f];
    });
  }

  const int margin_width = ens.objective == Objective::Softmax ? data.n_classes : 1;
  std::vector<double> margins(n * margin_width, ens.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<double> prob;  // softmax scratch

  auto total_loss = [&]() {
    double loss = 0.0;
    if (ens.objective == Objective::BinaryLogistic) {
      for (std::size_t i = 0; i < n; ++i) {
        const double m = margins[i];
        // -[y log p + (1-y) log(1-p)] in the numerically stable form
        loss += std::log1p(std::exp(-std::abs(m))) +
                (data.labels[i] == 1 ? std::max(-m, 0.0) : std::max(m, 0.0));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double* m = &margins[i * margin_width];
        const double mmax = *std::max_element(m, m + margin_width);
        double z = 0.0;
        for (int k = 0; k < margin_width; ++k) z += std::exp(m[k] - mmax);
        loss += std::log(z) - (m[data.labels[i]] - mmax);
      }
    }
    return loss;
  };

  if (trace) {
    trace->loss_per_round.clear();
    trace->loss_per_round.push_back(total_loss());
  }

  detail::TreeBuilder builder(data, sorted_columns, cfg);

  for (int round = 0; round < cfg.n_rounds; ++round) {
    if (ens.objective == Objective::BinaryLogistic) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = detail::sigmoid(margins[i]);
        grad[i] = p - data.labels[i];
        hess[i] = p * (1.0 - p);
      }
      Tree tree = builder.build(grad, hess, 0);
      for (std::size_t i = 0; i < n; ++i) {
        margins[i] += tree.nodes[route_leaf_index(tree, data.row(i))].score;
      }
      ens.trees.push_back(std::move(tree));
    } else {
      prob.assign(n * margin_width, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* m = &margins[i * margin_width];
        double* p = &prob[i * margin_width];
        const double mmax = *std::max_element(m, m + margin_width);
        double z = 0.0;
        for (int k = 0; k < margin_width; ++k) {
          p[k] = std::exp(m[k] - mmax);
          z += p[k];
        }
        for (int k = 0; k < margin_width; ++k) p[k] /= z;
      }
      std::vector<Tree> round_trees;
      round_trees.reserve(margin_width);
      for (int k = 0; k < margin_width; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          const double p = prob[i * margin_width + k];
          grad[i] = p - (data.labels[i] == k ? 1.0 : 0.0);
          hess[i] = p * (1.0 - p);
        }
        round_trees.push_back(builder.build(grad, hess, k));
      }
      // Margins update once the whole round is built, keeping the round's
      // gradient statistics consistent across classes.
      for (int k = 0; k < margin_width; ++k) {
        const Tree& tree = round_trees[k];
        for (std::size_t i = 0; i < n; ++i) {
          margins[i * margin_width + k] +=
              tree.nodes[route_leaf_index(tree, data.row(i))].score;
        }
      }
      for (auto& t : round_trees) ens.trees.push_back(std::move(t));
    }
    if (trace) trace->loss_per_round.push_back(total_loss());
  }
  return ens;
}

}  // namespace treesym
