#include <gtest/gtest.h>

#include <random>

#include "toy_models.hpp"
#include "treesym/attack/box.hpp"
#include "treesym/attack/oracle.hpp"

namespace {

using namespace treesym;
using namespace treesym::attack;
namespace tt = treesym::testing;

TEST(Interval, PlacementHonorsInclusivity) {
  const Interval iv{0.5, 0.8};
  EXPECT_EQ(place_in_interval(0.2, iv), 0.5);  // lower bound is attainable
  EXPECT_EQ(place_in_interval(0.6, iv), 0.6);
  EXPECT_EQ(place_in_interval(0.9, iv), 0.8 - kBoundaryEps);
  EXPECT_EQ(place_in_interval(0.8, iv), 0.8 - kBoundaryEps);  // hi is exclusive
}

TEST(Interval, DegenerateNarrowIntervalFallsBackToLowerBound) {
  const Interval iv{0.5, 0.5 + 1e-12};
  const double placed = place_in_interval(0.9, iv);
  EXPECT_TRUE(iv.contains(placed));
  EXPECT_EQ(placed, 0.5);
}

TEST(SparseBox, IntersectionDetectsEmptiness) {
  SparseBox a;
  ASSERT_TRUE(a.intersect_axis(0, Interval{0.0, 0.3}));
  SparseBox b;
  ASSERT_TRUE(b.intersect_axis(0, Interval{0.5, std::numeric_limits<double>::infinity()}));
  EXPECT_FALSE(a.intersect(b));  // [0, 0.3) and [0.5, inf) do not meet
}

TEST(LeafBoxes, StumpRegions) {
  const Ensemble stump = tt::make_stump();
  const TreeLeafBoxes boxes = leaf_boxes(stump.trees[0]);
  ASSERT_EQ(boxes.leaf_ids.size(), 2u);
  const SparseBox& left = boxes.box_by_leaf.at(1);
  const SparseBox& right = boxes.box_by_leaf.at(2);
  EXPECT_TRUE(left.contains({0.49}));
  EXPECT_FALSE(left.contains({0.5}));
  EXPECT_TRUE(right.contains({0.5}));  // threshold belongs to the right box
  EXPECT_TRUE(right.contains({1.0}));
}

// Any point inside a leaf's box routes to that leaf, including points placed
// exactly on inclusive lower bounds and just below exclusive upper bounds.
TEST(LeafBoxes, BoxMembershipMatchesRouting) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const Ensemble ens = tt::make_random_toy_ensemble(rng, d);
    for (const Tree& tree : ens.trees) {
      const TreeLeafBoxes boxes = leaf_boxes(tree);
      for (const int leaf : boxes.leaf_ids) {
        const SparseBox& box = boxes.box_by_leaf.at(leaf);
        // Projection of random points into the box must route to the leaf.
        for (int probe = 0; probe < 5; ++probe) {
          const std::vector<double> p = box.project(tt::random_point(rng, d));
          EXPECT_TRUE(box.contains(p));
          EXPECT_EQ(route_leaf_index(tree, p.data()), leaf);
        }
      }
    }
    // Conversely, the box of the routed leaf contains the point.
    for (int probe = 0; probe < 10; ++probe) {
      const std::vector<double> x = tt::random_point(rng, d);
      for (const Tree& tree : ens.trees) {
        const int leaf = route_leaf_index(tree, x.data());
        EXPECT_TRUE(leaf_boxes(tree).box_by_leaf.at(leaf).contains(x));
      }
    }
  }
}

TEST(ExactOracle, StumpMinimumIsExact) {
  const Ensemble stump = tt::make_stump();
  for (Norm norm : {Norm::L2, Norm::Linf}) {
    AttackConfig cfg;
    cfg.norm = norm;
    const AttackResult r = exact_oracle(stump, {0.2}, 0, cfg);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(r.l2, 0.5 - 0.2);
    EXPECT_EQ(r.linf, 0.5 - 0.2);
    EXPECT_EQ(r.l2, 0.3);  // 0.5 - 0.2 rounds to the same double as 0.3
    ASSERT_TRUE(r.adversarial.has_value());
    EXPECT_EQ((*r.adversarial)[0], 0.5);
    EXPECT_EQ(r.adversarial_label, 1);
  }
}

TEST(ExactOracle, MisclassifiedSourceHasZeroDistance) {
  const Ensemble stump = tt::make_stump();
  AttackConfig cfg;
  const AttackResult r = exact_oracle(stump, {0.7}, 0, cfg);
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.l2, 0.0);
  EXPECT_EQ(*r.adversarial, (std::vector<double>{0.7}));
}

TEST(ExactOracle, ConstantClassifierFails) {
  const Ensemble ens = tt::make_constant_classifier(2);
  AttackConfig cfg;
  const AttackResult r = exact_oracle(ens, {0.5, 0.5}, 1, cfg);
  EXPECT_FALSE(r.success);
}

TEST(ExactOracle, RefusesOversizedGrids) {
  // Eight features with ten distinct thresholds each: 11^8 cells, far over
  // the enforcement limit.
  Ensemble ens;
  ens.n_features = 8;
  ens.n_classes = 2;
  for (int f = 0; f < 8; ++f) {
    Tree tree;
    tree.nodes.push_back(TreeNode{});
    int node = 0;
    for (int k = 0; k < 10; ++k) {
      tree.nodes[node].feature = f;
      tree.nodes[node].threshold = 0.05 + 0.09 * k;
      tree.nodes[node].left = static_cast<int>(tree.nodes.size());
      tree.nodes[node].right = tree.nodes[node].left + 1;
      tree.nodes.push_back(TreeNode{});  // left leaf
      tree.nodes.push_back(TreeNode{});  // right child, split again
      tree.nodes[tree.nodes[node].left].score = k % 2 ? 0.5 : -0.5;
      node = tree.nodes[node].right;
    }
    tree.nodes[node].score = 0.25;
    ens.trees.push_back(std::move(tree));
  }
  EXPECT_GT(oracle_cell_count(ens), kOracleCellLimit);
  AttackConfig cfg;
  const std::vector<double> x0(8, 0.4);
  try {
    exact_oracle(ens, x0, 0, cfg);
    FAIL() << "expected refusal";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("cells"), std::string::npos);
  }
}

// The oracle's reported point always misclassifies and its norms match the
// claimed distances.
TEST(ExactOracle, WitnessIsValidOnRandomToys) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const Ensemble ens = tt::make_random_toy_ensemble(rng, d);
    const std::vector<double> x0 = tt::random_point(rng, d);
    const int y0 = predict_label(ens, x0);
    AttackConfig cfg;
    cfg.norm = (trial % 2) ? Norm::L2 : Norm::Linf;
    const AttackResult r = exact_oracle(ens, x0, y0, cfg);
    if (!r.success) continue;  // constant-label toy
    ASSERT_TRUE(r.adversarial.has_value());
    EXPECT_NE(predict_label(ens, *r.adversarial), y0);
    EXPECT_NEAR(r.l2, l2_dist(*r.adversarial, x0), 1e-15);
    EXPECT_NEAR(r.linf, linf_dist(*r.adversarial, x0), 1e-15);
    for (double v : *r.adversarial) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

}  // namespace
