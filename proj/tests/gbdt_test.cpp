#include "treesym/gbdt.hpp"

#include <gtest/gtest.h>

#include <random>

#include "treesym/datagen.hpp"
#include "treesym/model_io.hpp"

namespace {

using namespace treesym;

Dataset toy_two_point_dataset() {
  // 50 copies of (0.2 -> class 0) and (0.8 -> class 1).
  Dataset ds;
  ds.n_features = 1;
  ds.n_classes = 2;
  for (int i = 0; i < 50; ++i) {
    ds.push_row({0.2}, 0);
    ds.push_row({0.8}, 1);
  }
  return ds;
}

// Hand-derived split for the two-point toy set: at the zero base margin the
// logistic gradients are g = 0.5 - y and h = 0.25, so the left/right halves
// carry G = +/-25 and H = 12.5, the only candidate threshold is the midpoint
// 0.5, and the leaf weights are -eta * G / (H + lambda).
TEST(Train, TwoPointToySplitsAtMidpointWithDerivedWeights) {
  const Dataset ds = toy_two_point_dataset();
  TrainConfig cfg;
  cfg.n_rounds = 1;
  cfg.max_depth = 1;
  const Ensemble ens = train(ds, cfg);
  ASSERT_EQ(ens.trees.size(), 1u);
  const Tree& tree = ens.trees[0];
  ASSERT_EQ(tree.nodes.size(), 3u);
  const TreeNode& root = tree.nodes[0];
  ASSERT_FALSE(root.is_leaf());
  EXPECT_EQ(root.feature, 0);
  EXPECT_EQ(root.threshold, 0.5);  // midpoint of 0.2 and 0.8, exact

  const double expected_left = -0.3 * 25.0 / (12.5 + 1.0);
  const double expected_right = -0.3 * -25.0 / (12.5 + 1.0);
  EXPECT_DOUBLE_EQ(tree.nodes[root.left].score, expected_left);
  EXPECT_DOUBLE_EQ(tree.nodes[root.right].score, expected_right);
  EXPECT_LT(tree.nodes[root.left].score, 0.0);
  EXPECT_GT(tree.nodes[root.right].score, 0.0);
}

TEST(Train, SingleSampleYieldsSingleLeaf) {
  Dataset ds;
  ds.n_features = 2;
  ds.n_classes = 2;
  ds.push_row({0.3, 0.7}, 1);
  TrainConfig cfg;
  cfg.n_rounds = 1;
  cfg.max_depth = 6;
  const Ensemble ens = train(ds, cfg);
  ASSERT_EQ(ens.trees.size(), 1u);
  EXPECT_EQ(ens.trees[0].nodes.size(), 1u);
  EXPECT_TRUE(ens.trees[0].nodes[0].is_leaf());
}

TEST(Train, EmptyDatasetThrows) {
  Dataset ds;
  ds.n_features = 1;
  ds.n_classes = 2;
  EXPECT_THROW(train(ds, TrainConfig{}), std::invalid_argument);
}

TEST(Train, LabelOutsideClassRangeThrows) {
  Dataset ds;
  ds.n_features = 1;
  ds.n_classes = 2;
  ds.push_row({0.5}, 2);
  EXPECT_THROW(train(ds, TrainConfig{}), std::invalid_argument);
}

TEST(Train, EqualGainTieBreaksToLowestFeature) {
  // Feature 1 duplicates feature 0, so every split on feature 1 has an
  // equal-gain twin on feature 0; the chosen split must use feature 0.
  Dataset ds;
  ds.n_features = 2;
  ds.n_classes = 2;
  for (int i = 0; i < 20; ++i) {
    ds.push_row({0.2, 0.2}, 0);
    ds.push_row({0.8, 0.8}, 1);
  }
  TrainConfig cfg;
  cfg.n_rounds = 1;
  cfg.max_depth = 1;
  const Ensemble ens = train(ds, cfg);
  EXPECT_EQ(ens.trees[0].nodes[0].feature, 0);
}

TEST(Route, EqualityGoesRight) {
  Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0};
  tree.nodes[1].score = -1.0;
  tree.nodes[2].score = 1.0;
  EXPECT_EQ(route(tree, {0.5}).score, 1.0);      // v == t routes right
  EXPECT_EQ(route(tree, {0.49999}).score, -1.0); // strictly below goes left
}

TEST(Route, SingleLeafTreeAlwaysLands) {
  Tree tree;
  tree.nodes.resize(1);
  tree.nodes[0].score = 0.75;
  EXPECT_EQ(route(tree, {0.0}).score, 0.75);
  EXPECT_EQ(route(tree, {1.0}).score, 0.75);
}

TEST(PredictMargin, EmptyEnsembleGivesBaseScorePerClass) {
  Ensemble ens;
  ens.n_classes = 3;
  ens.n_features = 2;
  ens.objective = Objective::Softmax;
  ens.base_score = 0.25;
  EXPECT_EQ(predict_margin(ens, {0.1, 0.2}),
            (std::vector<double>{0.25, 0.25, 0.25}));
}

TEST(PredictMargin, OneTreeBinaryAddsReachedLeaf) {
  Ensemble ens;
  ens.n_classes = 2;
  ens.n_features = 1;
  ens.base_score = 0.5;
  Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0};
  tree.nodes[1].score = -1.0;
  tree.nodes[2].score = 2.0;
  ens.trees.push_back(tree);
  EXPECT_EQ(predict_margin(ens, {0.9})[0], 2.5);
  EXPECT_EQ(predict_margin(ens, {0.1})[0], -0.5);
}

TEST(PredictMargin, DimensionMismatchThrows) {
  Ensemble ens;
  ens.n_classes = 2;
  ens.n_features = 3;
  EXPECT_THROW(predict_margin(ens, {0.1}), std::invalid_argument);
}

TEST(PredictLabel, BinaryBoundaryGoesToClassOne) {
  Ensemble ens;
  ens.n_classes = 2;
  ens.n_features = 1;
  EXPECT_EQ(label_from_margins(ens, {0.0}), 1);
  EXPECT_EQ(label_from_margins(ens, {-1e-12}), 0);
}

TEST(PredictLabel, MulticlassArgmaxWithLowestIndexTies) {
  Ensemble ens;
  ens.n_classes = 3;
  ens.objective = Objective::Softmax;
  EXPECT_EQ(label_from_margins(ens, {2.0, 5.0, 1.0}), 1);
  Ensemble two;
  two.n_classes = 2;
  two.objective = Objective::Softmax;
  EXPECT_EQ(label_from_margins(two, {3.0, 3.0}), 0);
}

TEST(CountSplitConditions, CountsInternalNodesOnly) {
  Ensemble ens;
  ens.n_classes = 2;
  ens.n_features = 1;
  Tree leaf_tree;
  leaf_tree.nodes.resize(1);
  ens.trees.push_back(leaf_tree);
  ens.trees.push_back(leaf_tree);
  EXPECT_EQ(count_split_conditions(ens), 0);

  // One full depth-2 tree: 3 internal nodes.
  Tree full;
  full.nodes.resize(7);
  full.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0};
  full.nodes[1] = TreeNode{0, 0.25, 3, 4, 0.0};
  full.nodes[2] = TreeNode{0, 0.75, 5, 6, 0.0};
  Ensemble ens2;
  ens2.n_classes = 2;
  ens2.n_features = 1;
  ens2.trees.push_back(full);
  EXPECT_EQ(count_split_conditions(ens2), 3);
}

TEST(ThresholdsPerFeature, DeduplicatesAndSorts) {
  Ensemble ens;
  ens.n_classes = 2;
  ens.n_features = 3;
  Tree t1;
  t1.nodes.resize(3);
  t1.nodes[0] = TreeNode{2, 0.5, 1, 2, 0.0};
  Tree t2 = t1;  // same feature, same threshold
  ens.trees.push_back(t1);
  ens.trees.push_back(t2);
  const auto map = thresholds_per_feature(ens);
  ASSERT_EQ(map.size(), 1u);
  EXPECT_EQ(map.at(2), (std::vector<double>{0.5}));

  Ensemble empty;
  empty.n_classes = 2;
  empty.n_features = 1;
  EXPECT_TRUE(thresholds_per_feature(empty).empty());
}

TEST(Train, MarginAdditivityAcrossTrees) {
  const SyntheticData data = make_bc10(4);
  TrainConfig cfg;
  cfg.n_rounds = 3;
  cfg.max_depth = 4;
  const Ensemble ens = train(apply_normalizer(fit_normalizer(data.train), data.train), cfg);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(10);
    for (double& v : x) v = unif(rng);
    double manual = ens.base_score;
    for (const Tree& t : ens.trees) manual += route(t, x).score;
    EXPECT_DOUBLE_EQ(predict_margin(ens, x)[0], manual);
  }
}

TEST(Train, TrainingLossNonIncreasing) {
  const SyntheticData data = make_dia8(6);
  const Dataset train_n = apply_normalizer(fit_normalizer(data.train), data.train);
  TrainConfig cfg;
  cfg.n_rounds = 12;
  cfg.max_depth = 5;
  TrainTrace trace;
  train(train_n, cfg, &trace);
  ASSERT_EQ(trace.loss_per_round.size(), 13u);
  for (std::size_t r = 1; r < trace.loss_per_round.size(); ++r) {
    EXPECT_LE(trace.loss_per_round[r], trace.loss_per_round[r - 1] + 1e-9);
  }
}

TEST(Train, DeterministicAcrossRuns) {
  const SyntheticData data = make_bc10(8);
  const Dataset train_n = apply_normalizer(fit_normalizer(data.train), data.train);
  TrainConfig cfg;
  cfg.n_rounds = 4;
  cfg.max_depth = 6;
  const Ensemble a = train(train_n, cfg);
  const Ensemble b = train(train_n, cfg);
  EXPECT_EQ(serialize(a), serialize(b));
}

TEST(Train, SoftmaxTreesAreRoundMajor) {
  const SyntheticData data = make_fmnist4(1, 60, 20);
  TrainConfig cfg;
  cfg.n_rounds = 2;
  cfg.max_depth = 3;
  const Ensemble ens = train(data.train, cfg);
  EXPECT_EQ(ens.objective, Objective::Softmax);
  ASSERT_EQ(ens.trees.size(), 8u);
  for (std::size_t i = 0; i < ens.trees.size(); ++i) {
    EXPECT_EQ(ens.trees[i].class_index, static_cast<int>(i) % 4);
  }
}

// Labels are constant within every cell of the threshold grid.
TEST(Train, RoutingPiecewiseConstantOnCells) {
  const SyntheticData data = make_tabular(9, 80, 20, 2, 0.1, 0.8, 0.2);
  TrainConfig cfg;
  cfg.n_rounds = 2;
  cfg.max_depth = 3;
  const Ensemble ens = train(data.train, cfg);
  const auto per_feature = thresholds_per_feature(ens);
  std::vector<std::vector<double>> cuts(2, std::vector<double>{});
  for (const auto& [f, ts] : per_feature) cuts[f] = ts;

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto cell_bounds = [&](int f, std::size_t cell) {
    const double lo = cell == 0 ? 0.0 : cuts[f][cell - 1];
    const double hi = cell == cuts[f].size() ? 1.0 : cuts[f][cell];
    return std::pair<double, double>(lo, hi);
  };
  for (std::size_t c0 = 0; c0 <= cuts[0].size(); ++c0) {
    for (std::size_t c1 = 0; c1 <= cuts[1].size(); ++c1) {
      const auto [lo0, hi0] = cell_bounds(0, c0);
      const auto [lo1, hi1] = cell_bounds(1, c1);
      const int ref = predict_label(ens, {lo0, lo1});
      for (int trial = 0; trial < 5; ++trial) {
        const double x0 = lo0 + unif(rng) * (hi0 - lo0) * 0.999;
        const double x1 = lo1 + unif(rng) * (hi1 - lo1) * 0.999;
        EXPECT_EQ(predict_label(ens, {x0, x1}), ref);
      }
    }
  }
}

}  // namespace
