#pragma once

#include <random>
#include <vector>

#include "treesym/attack/common.hpp"
#include "treesym/attack/opt.hpp"

namespace treesym::attack {

/// Boundary attack from hard labels only: bisect to the decision boundary,
/// estimate the boundary normal by Monte-Carlo label probes, take a geometric
/// step along it with halving until adversarial, and re-project. The Linf
/// variant steps along the sign of the estimate and bisects with per-axis
/// clipping toward the source.
inline AttackResult hsja_attack(const LabelFn& classify,
                                const std::vector<double>& x0, int y0,
                                const AttackConfig& cfg) {
  validate(cfg);
  const std::size_t d = x0.size();
  QueryBudget budget(classify, cfg.max_queries);
  std::mt19937_64 rng(cfg.seed);

  const int initial_label = budget(x0);
  if (initial_label != y0) {
    return make_success(x0, y0, x0, initial_label, budget.used());
  }

  auto start = find_initial_adversarial(budget, x0, y0, rng);
  if (!start) return make_failure(y0, budget.used());

  BoundaryPair bp = bisect_to_boundary(budget, x0, y0, std::move(start->point),
                                       start->label, cfg.hsja_bs_tol, cfg.norm);
  std::vector<double> boundary = std::move(bp.adv);
  int boundary_label = bp.adv_label;
  double dist = norm_dist(cfg.norm, boundary, x0);

  std::vector<double> best = boundary;
  int best_label = boundary_label;
  double best_dist = dist;

  std::vector<double> probe(d), normal(d);
  std::vector<signed char> phis;
  std::vector<std::vector<double>> us;

  for (int t = 1; t <= 80 && !budget.exhausted(); ++t) {
    const int n_samples = static_cast<int>(
        cfg.hsja_init_grad_samples * std::sqrt(static_cast<double>(t)));
    const double delta = std::max(1e-6, 0.1 * dist);

    us.clear();
    phis.clear();
    for (int b = 0; b < n_samples && !budget.exhausted(); ++b) {
      auto u = detail::gaussian_unit(d, rng);
      for (std::size_t i = 0; i < d; ++i) {
        probe[i] = std::clamp(boundary[i] + delta * u[i], 0.0, 1.0);
      }
      phis.push_back(budget(probe) != y0 ? 1 : -1);
      us.push_back(std::move(u));
    }
    if (us.empty()) break;

    double phi_mean = 0.0;
    for (signed char s : phis) phi_mean += s;
    phi_mean /= phis.size();
    std::fill(normal.begin(), normal.end(), 0.0);
    for (std::size_t b = 0; b < us.size(); ++b) {
      const double w = phis[b] - phi_mean;
      if (w == 0.0 && std::abs(phi_mean) != 1.0) continue;
      // When every probe agrees, the raw sign average is the only signal.
      const double weight = std::abs(phi_mean) == 1.0 ? phi_mean : w;
      for (std::size_t i = 0; i < d; ++i) normal[i] += weight * us[b][i];
    }
    double nn = 0.0;
    for (double v : normal) nn += v * v;
    if (nn == 0.0) continue;
    nn = std::sqrt(nn);
    for (double& v : normal) v /= nn;

    // Geometric step with halving until the candidate stays adversarial.
    double step = dist / std::sqrt(static_cast<double>(t));
    bool stepped = false;
    int candidate_label = -1;
    std::vector<double> candidate(d);
    for (int halving = 0; halving < 12 && !budget.exhausted(); ++halving) {
      for (std::size_t i = 0; i < d; ++i) {
        const double dir = cfg.norm == Norm::Linf
                               ? (normal[i] > 0 ? 1.0 : (normal[i] < 0 ? -1.0 : 0.0))
                               : normal[i];
        candidate[i] = std::clamp(boundary[i] + step * dir, 0.0, 1.0);
      }
      const int label = budget(candidate);
      if (label != y0) {
        stepped = true;
        candidate_label = label;
        break;
      }
      step *= 0.5;
    }
    if (stepped) {
      BoundaryPair refined =
          bisect_to_boundary(budget, x0, y0, std::move(candidate),
                             candidate_label, cfg.hsja_bs_tol, cfg.norm);
      boundary = std::move(refined.adv);
      boundary_label = refined.adv_label;
      dist = norm_dist(cfg.norm, boundary, x0);
      if (dist < best_dist) {
        best_dist = dist;
        best = boundary;
        best_label = boundary_label;
      }
    }
    if (cfg.trace) cfg.trace({cfg.sample_id, "hsja", t, best_dist, budget.used()});
  }

  return make_success(x0, y0, std::move(best), best_label, budget.used());
}

}  // namespace treesym::attack
