#include <gtest/gtest.h>

#include <random>

#include "toy_models.hpp"
#include "treesym/attack/cube.hpp"
#include "treesym/attack/hsja.hpp"
#include "treesym/attack/lt.hpp"
#include "treesym/attack/opt.hpp"
#include "treesym/attack/oracle.hpp"

namespace {

using namespace treesym;
using namespace treesym::attack;
namespace tt = treesym::testing;

const std::vector<double> kStumpSource = {0.2};
constexpr int kStumpLabel = 0;
const double kStumpMinimum = 0.5 - 0.2;

AttackConfig base_config(Norm norm, std::uint64_t seed = 7) {
  AttackConfig cfg;
  cfg.norm = norm;
  cfg.seed = seed;
  return cfg;
}

TEST(CubeAttack, RecoversStumpMinimumWithinTolerance) {
  const Ensemble stump = tt::make_stump();
  const auto fn = ensemble_label_fn(stump);
  const AttackResult r =
      cube_attack(fn, kStumpSource, kStumpLabel, base_config(Norm::Linf), &stump);
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.linf, kStumpMinimum, 1e-3);
  EXPECT_LE(r.queries, 20000);
  EXPECT_NE(fn(*r.adversarial), kStumpLabel);
}

TEST(CubeAttack, HardLabelModeAlsoConverges) {
  const Ensemble stump = tt::make_stump();
  const auto fn = ensemble_label_fn(stump);
  const AttackResult r =
      cube_attack(fn, kStumpSource, kStumpLabel, base_config(Norm::Linf));
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.linf, kStumpMinimum, 1e-3);
}

TEST(CubeAttack, TenBisectionRoundsReachTwoToMinusTen) {
  const Ensemble stump = tt::make_stump();
  AttackConfig cfg = base_config(Norm::Linf);
  cfg.cube_eps_tol = 1.0 / 1024.0;
  const AttackResult r =
      cube_attack(ensemble_label_fn(stump), kStumpSource, kStumpLabel, cfg, &stump);
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.linf, kStumpMinimum, 1.0 / 1024.0 + 1e-12);
}

TEST(CubeAttack, ConstantClassifierFailsAtFullBudget) {
  const Ensemble ens = tt::make_constant_classifier(3);
  AttackConfig cfg = base_config(Norm::Linf);
  cfg.max_queries = 500;
  const AttackResult r =
      cube_attack(ensemble_label_fn(ens), {0.5, 0.5, 0.5}, 1, cfg, &ens);
  EXPECT_FALSE(r.success);
  EXPECT_LE(r.queries, 500);
}

TEST(LtAttack, StumpMinimumIsExact) {
  const Ensemble stump = tt::make_stump();
  const AttackResult r =
      lt_attack(stump, kStumpSource, kStumpLabel, base_config(Norm::Linf));
  ASSERT_TRUE(r.success);
  EXPECT_EQ(r.linf, kStumpMinimum);  // lands exactly on the inclusive bound
  EXPECT_EQ(r.l2, kStumpMinimum);
  EXPECT_EQ((*r.adversarial)[0], 0.5);
  EXPECT_EQ(r.adversarial_label, 1);
}

TEST(LtAttack, InfeasibleNeighborTuplesAreSkipped) {
  // Two stumps on the same feature with thresholds 0.3 and 0.7. The label
  // flips only when both trees route right, so at the optimum (exactly 0.7)
  // the hamming-1 neighbor that swaps the first tree back to its left leaf
  // intersects [0, 0.3) with [0.7, inf): an empty box that must be skipped
  // without disturbing the search.
  Ensemble ens;
  ens.n_features = 1;
  ens.n_classes = 2;
  for (double t : {0.3, 0.7}) {
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0] = TreeNode{0, t, 1, 2, 0.0};
    tree.nodes[1].score = -0.6;
    tree.nodes[2].score = 0.4;
    ens.trees.push_back(tree);
  }
  const std::vector<double> x0 = {0.1};
  const int y0 = predict_label(ens, x0);
  ASSERT_EQ(y0, 0);
  const AttackResult r = lt_attack(ens, x0, y0, base_config(Norm::Linf));
  ASSERT_TRUE(r.success);
  EXPECT_NE(predict_label(ens, *r.adversarial), y0);
  EXPECT_EQ((*r.adversarial)[0], 0.7);  // inclusive bound of the far region
  EXPECT_EQ(r.linf, 0.7 - 0.1);
}

TEST(LtAttack, MatchesOracleOnMostToyInstances) {
  std::mt19937_64 rng(41);
  int compared = 0;
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const Ensemble ens = tt::make_random_toy_ensemble(rng, d);
    const std::vector<double> x0 = tt::random_point(rng, d);
    const int y0 = predict_label(ens, x0);
    AttackConfig cfg = base_config(Norm::Linf, trial);
    const AttackResult oracle = exact_oracle(ens, x0, y0, cfg);
    const AttackResult lt = lt_attack(ens, x0, y0, cfg);
    if (!oracle.success || !lt.success) continue;
    ++compared;
    EXPECT_GE(lt.linf, oracle.linf - 1e-9);
    if (lt.linf <= oracle.linf + 1e-9) ++matched;
  }
  ASSERT_GT(compared, 50);
  // The greedy search reaches the optimum on the vast majority of toys.
  EXPECT_GE(static_cast<double>(matched) / compared, 0.8);
}

TEST(OptAttack, RecoversStumpMinimum) {
  const Ensemble stump = tt::make_stump();
  const AttackResult r = opt_attack(ensemble_label_fn(stump), kStumpSource,
                                    kStumpLabel, base_config(Norm::L2));
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.l2, kStumpMinimum, 1e-3);
  EXPECT_LE(r.queries, 20000);
}

TEST(OptAttack, RaySearchReturnsNothingAwayFromBoundary) {
  const Ensemble stump = tt::make_stump();
  QueryBudget budget(ensemble_label_fn(stump), 1000);
  const auto hit = treesym::attack::detail::ray_search(
      budget, kStumpSource, kStumpLabel, {-1.0}, 1e-4, 2.0);
  EXPECT_FALSE(hit.has_value());  // moving left never flips the stump
}

TEST(OptAttack, ConstantClassifierFails) {
  const Ensemble ens = tt::make_constant_classifier(2);
  AttackConfig cfg = base_config(Norm::L2);
  cfg.max_queries = 2000;
  const AttackResult r = opt_attack(ensemble_label_fn(ens), {0.4, 0.6}, 1, cfg);
  EXPECT_FALSE(r.success);
  EXPECT_LE(r.queries, 2000);
}

TEST(SignOptAttack, RecoversStumpMinimum) {
  const Ensemble stump = tt::make_stump();
  const AttackResult r = signopt_attack(ensemble_label_fn(stump), kStumpSource,
                                        kStumpLabel, base_config(Norm::L2));
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.l2, kStumpMinimum, 5e-3);
  EXPECT_LE(r.queries, 20000);
}

TEST(SignOptAttack, OrthogonalProbesGiveZeroUsefulComponent) {
  // Feature 1 never appears in the model; probes confined to that axis carry
  // no information, so the estimate has no component along feature 0 and the
  // iteration cannot move the direction.
  Ensemble ens;
  ens.n_features = 2;
  ens.n_classes = 2;
  Tree tree;
  tree.nodes.resize(3);
  tree.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0};
  tree.nodes[1].score = -1.0;
  tree.nodes[2].score = 1.0;
  ens.trees.push_back(tree);

  QueryBudget budget(ensemble_label_fn(ens), 1000);
  const std::vector<double> x0 = {0.2, 0.5};
  const std::vector<double> theta = {1.0, 0.0};
  const std::vector<std::vector<double>> probes = {{0.0, 1.0}, {0.0, -1.0}};
  const auto estimate = signopt_estimate(budget, x0, 0, theta, 0.31, probes, 0.05);
  EXPECT_EQ(estimate[0], 0.0);
}

TEST(HsjaAttack, RecoversStumpMinimum) {
  const Ensemble stump = tt::make_stump();
  const AttackResult r = hsja_attack(ensemble_label_fn(stump), kStumpSource,
                                     kStumpLabel, base_config(Norm::L2));
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.l2, kStumpMinimum, 1e-2);
  EXPECT_LE(r.queries, 20000);
}

TEST(HsjaAttack, ConstantClassifierFails) {
  const Ensemble ens = tt::make_constant_classifier(2);
  AttackConfig cfg = base_config(Norm::L2);
  cfg.max_queries = 1000;
  const AttackResult r = hsja_attack(ensemble_label_fn(ens), {0.4, 0.6}, 1, cfg);
  EXPECT_FALSE(r.success);
}

TEST(BisectToBoundary, ContractHolds) {
  const Ensemble stump = tt::make_stump();
  QueryBudget budget(ensemble_label_fn(stump), 5000);
  const double tol = 1e-4;
  const BoundaryPair pair =
      bisect_to_boundary(budget, kStumpSource, kStumpLabel, {0.9}, 1, tol);
  EXPECT_NE(predict_label(stump, pair.adv), kStumpLabel);
  EXPECT_EQ(predict_label(stump, pair.non_adv), kStumpLabel);
  EXPECT_LE(l2_dist(pair.adv, pair.non_adv), tol);
  EXPECT_EQ(pair.adv_label, 1);
}

// Query budgets hold for every attack even when set very low.
TEST(AllAttacks, RespectTinyQueryBudgets) {
  std::mt19937_64 rng(47);
  const Ensemble ens = tt::make_random_toy_ensemble(rng, 3);
  const std::vector<double> x0 = tt::random_point(rng, 3);
  const int y0 = predict_label(ens, x0);
  AttackConfig cfg = base_config(Norm::Linf, 11);
  cfg.max_queries = 37;
  const auto fn = ensemble_label_fn(ens);
  EXPECT_LE(cube_attack(fn, x0, y0, cfg, &ens).queries, 37);
  EXPECT_LE(lt_attack(ens, x0, y0, cfg).queries, 37);
  cfg.norm = Norm::L2;
  EXPECT_LE(opt_attack(fn, x0, y0, cfg).queries, 37);
  EXPECT_LE(signopt_attack(fn, x0, y0, cfg).queries, 37);
  EXPECT_LE(hsja_attack(fn, x0, y0, cfg).queries, 37);
}

// Every claimed success must genuinely flip the label, stay inside the unit
// box, and report norms that match the emitted point.
TEST(AllAttacks, SuccessesAreValidOnRandomToys) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const Ensemble ens = tt::make_random_toy_ensemble(rng, d);
    const std::vector<double> x0 = tt::random_point(rng, d);
    const int y0 = predict_label(ens, x0);
    const auto fn = ensemble_label_fn(ens);
    AttackConfig cfg = base_config(Norm::Linf, 100 + trial);
    cfg.max_queries = 4000;
    cfg.cube_iters = 200;

    std::vector<AttackResult> results;
    results.push_back(cube_attack(fn, x0, y0, cfg, &ens));
    results.push_back(lt_attack(ens, x0, y0, cfg));
    AttackConfig l2cfg = cfg;
    l2cfg.norm = Norm::L2;
    results.push_back(opt_attack(fn, x0, y0, l2cfg));
    results.push_back(signopt_attack(fn, x0, y0, l2cfg));
    results.push_back(hsja_attack(fn, x0, y0, l2cfg));

    for (const AttackResult& r : results) {
      if (!r.success) continue;
      ASSERT_TRUE(r.adversarial.has_value());
      EXPECT_NE(fn(*r.adversarial), y0);
      EXPECT_EQ(r.original_label, y0);
      EXPECT_NE(r.adversarial_label, y0);
      EXPECT_NEAR(r.l2, l2_dist(*r.adversarial, x0), 1e-9);
      EXPECT_NEAR(r.linf, linf_dist(*r.adversarial, x0), 1e-9);
      for (double v : *r.adversarial) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

}  // namespace
