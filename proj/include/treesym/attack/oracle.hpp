#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesym/attack/box.hpp"
#include "treesym/attack/common.hpp"

namespace treesym::attack {

inline constexpr std::uint64_t kOracleCellLimit = 10'000'000;

/// Number of grid cells induced by the ensemble's thresholds, saturating at
/// one past the enforcement limit.
inline std::uint64_t oracle_cell_count(const Ensemble& ens) {
  const auto per_feature = thresholds_per_feature(ens);
  std::uint64_t cells = 1;
  for (const auto& [f, ts] : per_feature) {
    (void)f;
    const std::uint64_t k = ts.size() + 1;
    if (cells > (kOracleCellLimit + 1) / k) return kOracleCellLimit + 1;
    cells *= k;
  }
  return cells;
}

/// Brute-force minimal-perturbation search: enumerates every cell of the
/// threshold-induced grid, takes the exact projection distance of x0 onto
/// each misclassifying cell, and returns the global minimum under cfg.norm.
/// Exact by construction, so it lower-bounds every attack on the same model.
inline AttackResult exact_oracle(const Ensemble& ens,
                                 const std::vector<double>& x0, int y0,
                                 const AttackConfig& cfg) {
  if (static_cast<int>(x0.size()) != ens.n_features) {
    throw std::invalid_argument("exact_oracle: dimension mismatch");
  }
  const std::uint64_t cells = oracle_cell_count(ens);
  if (cells > kOracleCellLimit) {
    throw std::runtime_error(
        "exact_oracle: threshold grid of more than " +
        std::to_string(kOracleCellLimit) +
        " cells refused (model too fragmented for brute force)");
  }

  long queries = 0;
  auto predict = [&](const std::vector<double>& x) {
    ++queries;
    return predict_label(ens, x);
  };

  if (predict(x0) != y0) {
    // Source already misclassifies; the minimal perturbation is zero.
    AttackResult r = make_success(x0, y0, x0, predict_label(ens, x0), queries);
    return r;
  }

  const auto per_feature_map = thresholds_per_feature(ens);
  // Only features that actually appear in a split can change the label.
  std::vector<int> features;
  std::vector<std::vector<double>> cuts;
  for (const auto& [f, ts] : per_feature_map) {
    features.push_back(f);
    cuts.push_back(ts);
  }

  const Norm norm = cfg.norm;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_point;
  std::vector<double> point = x0;

  // DFS over the per-feature interval choices with distance pruning.
  // `acc` carries the running sum of squares (L2) or max (Linf).
  auto interval_at = [&](std::size_t fi, std::size_t cell) {
    const auto& ts = cuts[fi];
    Interval iv;
    iv.lo = cell == 0 ? 0.0 : ts[cell - 1];
    iv.hi = cell == ts.size() ? std::numeric_limits<double>::infinity() : ts[cell];
    return iv;
  };

  std::vector<std::size_t> choice(features.size(), 0);
  std::function<void(std::size_t, double)> dfs = [&](std::size_t fi, double acc) {
    if (best == 0.0) return;
    if (fi == features.size()) {
      const double dist = norm == Norm::L2 ? std::sqrt(acc) : acc;
      if (dist >= best) return;
      if (predict(point) != y0) {
        best = dist;
        best_point = point;
      }
      return;
    }
    const int f = features[fi];
    for (std::size_t cell = 0; cell <= cuts[fi].size(); ++cell) {
      const Interval iv = interval_at(fi, cell);
      const double placed = place_in_interval(x0[f], iv);
      const double d = std::abs(x0[f] - placed);
      double next_acc = norm == Norm::L2 ? acc + d * d : std::max(acc, d);
      const double lower_bound = norm == Norm::L2 ? std::sqrt(next_acc) : next_acc;
      if (lower_bound >= best) continue;
      point[f] = placed;
      dfs(fi + 1, next_acc);
    }
    point[f] = x0[f];
  };
  dfs(0, 0.0);

  if (best_point.empty()) return make_failure(y0, queries);
  AttackResult r = make_success(x0, y0, std::move(best_point), -1, queries);
  r.adversarial_label = predict_label(ens, *r.adversarial);
  return r;
}

}  // namespace treesym::attack
