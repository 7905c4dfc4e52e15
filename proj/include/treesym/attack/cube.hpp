#pragma once

#include <optional>
#include <random>
#include <vector>

#include "treesym/attack/common.hpp"

namespace treesym::attack {

/// Random-search L-infinity attack: proposals overwrite a random coordinate
/// subset with x0 +/- eps, an outer binary search shrinks eps to the smallest
/// level that still flips the label. With a white-box ensemble the inner
/// acceptance follows the functional margin; against an opaque classifier it
/// falls back to hard-label flips.
inline AttackResult cube_attack(const LabelFn& classify,
                                const std::vector<double>& x0, int y0,
                                const AttackConfig& cfg,
                                const Ensemble* white_box = nullptr) {
  validate(cfg);
  const std::size_t d = x0.size();
  QueryBudget budget(classify, cfg.max_queries);
  std::mt19937_64 rng(cfg.seed);

  const int initial_label = budget(x0);
  if (initial_label != y0) {
    return make_success(x0, y0, x0, initial_label, budget.used());
  }

  const double p =
      cfg.cube_subset_prob > 0.0
          ? cfg.cube_subset_prob
          : std::max(1.0 / static_cast<double>(d), 0.1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution flip_sign(0.5);

  std::vector<double> margins;  // white-box scratch

  // Runs the fixed-eps random search; returns a flipped candidate with its
  // observed label, or nothing when the level fails.
  auto inner = [&](double eps) -> std::optional<std::pair<std::vector<double>, int>> {
    std::vector<double> x_cur = x0;
    double cur_margin = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> subset;
    for (int it = 0; it < cfg.cube_iters && !budget.exhausted(); ++it) {
      subset.clear();
      while (subset.empty()) {
        for (std::size_t i = 0; i < d; ++i) {
          if (unif(rng) < p) subset.push_back(i);
        }
      }
      std::vector<double> x_prop = x_cur;
      for (std::size_t i : subset) {
        const double delta = flip_sign(rng) ? eps : -eps;
        x_prop[i] = std::clamp(x0[i] + delta, 0.0, 1.0);
      }
      if (white_box) {
        budget.charge();
        predict_margin_into(*white_box, x_prop.data(), margins);
        const int label = label_from_margins(*white_box, margins);
        if (label != y0) return std::make_pair(std::move(x_prop), label);
        const double m = adversarial_margin(*white_box, margins, y0);
        if (m > cur_margin) {
          cur_margin = m;
          x_cur = std::move(x_prop);
        }
      } else {
        const int label = budget(x_prop);
        if (label != y0) return std::make_pair(std::move(x_prop), label);
      }
    }
    return std::nullopt;
  };

  double lo = 0.0;
  double hi = cfg.cube_init_eps;
  auto first = inner(hi);
  if (!first) return make_failure(y0, budget.used());
  auto best = std::move(*first);

  int level = 0;
  while (hi - lo > cfg.cube_eps_tol && !budget.exhausted()) {
    const double mid = 0.5 * (lo + hi);
    if (auto r = inner(mid)) {
      hi = mid;
      best = std::move(*r);
    } else {
      lo = mid;
    }
    if (cfg.trace) {
      cfg.trace({cfg.sample_id, "cube", level, hi, budget.used()});
    }
    ++level;
  }

  return make_success(x0, y0, std::move(best.first), best.second, budget.used());
}

}  // namespace treesym::attack
