#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

#include "treesym/attack/box.hpp"
#include "treesym/attack/common.hpp"

namespace treesym::attack {

namespace detail {

/// Random grid-cell probes: one interval per split feature, evaluated at the
/// cell's inner point. Sharper than uniform sampling once the model is known.
inline std::optional<InitialPoint> probe_grid_cells(const Ensemble& ens,
                                                    QueryBudget& budget,
                                                    const std::vector<double>& x0,
                                                    int y0, std::mt19937_64& rng,
                                                    int max_probes) {
  const auto per_feature = thresholds_per_feature(ens);
  if (per_feature.empty()) return std::nullopt;
  std::vector<double> p = x0;
  for (int probe = 0; probe < max_probes && !budget.exhausted(); ++probe) {
    for (const auto& [f, ts] : per_feature) {
      std::uniform_int_distribution<std::size_t> pick(0, ts.size());
      const std::size_t cell = pick(rng);
      const double lo = cell == 0 ? 0.0 : ts[cell - 1];
      const double hi = cell == ts.size() ? 1.0 : ts[cell];
      p[f] = lo + (hi - lo) / 2.0;
    }
    const int label = budget(p);
    if (label != y0) return InitialPoint{p, label};
  }
  return std::nullopt;
}

}  // namespace detail

/// Greedy discrete search over leaf tuples: starting from any adversarial
/// point, repeatedly swaps one tree's leaf (hamming distance 1), projects the
/// source onto the new tuple's feasible box, and keeps the move when it stays
/// adversarial and shrinks the configured norm. Restarts from fresh initial
/// points to escape local optima.
inline AttackResult lt_attack(const Ensemble& ens,
                              const std::vector<double>& x0, int y0,
                              const AttackConfig& cfg) {
  if (static_cast<int>(x0.size()) != ens.n_features) {
    throw std::invalid_argument("lt_attack: dimension mismatch");
  }
  validate(cfg);
  QueryBudget budget(ensemble_label_fn(ens), cfg.max_queries);
  std::mt19937_64 rng(cfg.seed);

  const int initial_label = budget(x0);
  if (initial_label != y0) {
    return make_success(x0, y0, x0, initial_label, budget.used());
  }

  const std::size_t n_trees = ens.trees.size();
  std::vector<TreeLeafBoxes> boxes;
  boxes.reserve(n_trees);
  for (const Tree& t : ens.trees) boxes.push_back(leaf_boxes(t));

  std::vector<double> best_point;
  double best_dist = std::numeric_limits<double>::infinity();
  int best_label = -1;
  int stale_restarts = 0;

  for (int restart = 0; restart < cfg.lt_restarts && !budget.exhausted();
       ++restart) {
    if (stale_restarts > cfg.lt_max_no_improve) break;

    auto start = find_initial_adversarial(budget, x0, y0, rng);
    if (!start) start = detail::probe_grid_cells(ens, budget, x0, y0, rng, 200);
    if (!start) {
      ++stale_restarts;
      continue;
    }

    BoundaryPair warm = bisect_to_boundary(budget, x0, y0, std::move(start->point),
                                           start->label, 1e-6);
    std::vector<double> cur = std::move(warm.adv);
    int cur_label = warm.adv_label;
    double cur_dist = norm_dist(cfg.norm, cur, x0);

    std::vector<SparseBox> prefix(n_trees + 1), suffix(n_trees + 1);
    for (int iter = 0; iter < 500 && !budget.exhausted(); ++iter) {
      // Current tuple, its margins, and the feasible-box prefix/suffix scans.
      std::vector<int> tuple(n_trees);
      std::vector<double> margins(ens.n_classes, ens.base_score);
      for (std::size_t i = 0; i < n_trees; ++i) {
        tuple[i] = route_leaf_index(ens.trees[i], cur.data());
        margins[ens.trees[i].class_index] += ens.trees[i].nodes[tuple[i]].score;
      }
      prefix[0] = SparseBox{};
      for (std::size_t i = 0; i < n_trees; ++i) {
        prefix[i + 1] = prefix[i];
        prefix[i + 1].intersect(boxes[i].box_by_leaf.at(tuple[i]));
      }
      suffix[n_trees] = SparseBox{};
      for (std::size_t i = n_trees; i-- > 0;) {
        suffix[i] = suffix[i + 1];
        suffix[i].intersect(boxes[i].box_by_leaf.at(tuple[i]));
      }

      // Tighten within the current tuple first: the projection of x0 onto the
      // full intersection routes identically, so it can only shrink the norm.
      {
        std::vector<double> proj = prefix[n_trees].project(x0);
        const double d = norm_dist(cfg.norm, proj, x0);
        if (d < cur_dist) {
          const int label = budget(proj);
          if (label != y0) {
            cur = std::move(proj);
            cur_label = label;
            cur_dist = d;
          }
        }
      }

      double cand_dist = cur_dist;
      std::vector<double> cand_point;

      for (std::size_t i = 0; i < n_trees; ++i) {
        SparseBox rest = prefix[i];
        rest.intersect(suffix[i + 1]);
        const int cls = ens.trees[i].class_index;
        const double old_score = ens.trees[i].nodes[tuple[i]].score;

        // Penalties of x0 against the other trees' constraints, reused for
        // every alternative leaf of tree i.
        double rest_sumsq = 0.0;
        std::vector<std::pair<double, int>> rest_pens;  // (penalty, axis) desc
        for (const auto& [f, iv] : rest.iv) {
          const double pen = interval_distance(x0[f], iv);
          rest_sumsq += pen * pen;
          if (pen > 0.0) rest_pens.emplace_back(pen, f);
        }
        std::sort(rest_pens.begin(), rest_pens.end(),
                  std::greater<std::pair<double, int>>());

        for (const int leaf : boxes[i].leaf_ids) {
          if (leaf == tuple[i]) continue;
          const double new_score = ens.trees[i].nodes[leaf].score;
          margins[cls] += new_score - old_score;
          const int label = label_from_margins(ens, margins);
          margins[cls] -= new_score - old_score;
          if (label == y0) continue;

          const SparseBox& leaf_box = boxes[i].box_by_leaf.at(leaf);
          bool feasible = true;
          double dist;
          if (cfg.norm == Norm::L2) {
            double sumsq = rest_sumsq;
            for (const auto& [f, iv] : leaf_box.iv) {
              Interval merged = iv;
              auto it = rest.iv.find(f);
              if (it != rest.iv.end()) {
                merged.lo = std::max(merged.lo, it->second.lo);
                merged.hi = std::min(merged.hi, it->second.hi);
                if (merged.empty()) {
                  feasible = false;
                  break;
                }
                const double old_pen = interval_distance(x0[f], it->second);
                sumsq -= old_pen * old_pen;
              }
              const double pen = interval_distance(x0[f], merged);
              sumsq += pen * pen;
            }
            if (!feasible) continue;
            dist = std::sqrt(std::max(0.0, sumsq));
          } else {
            double local_max = 0.0;
            for (const auto& [f, iv] : leaf_box.iv) {
              Interval merged = iv;
              auto it = rest.iv.find(f);
              if (it != rest.iv.end()) {
                merged.lo = std::max(merged.lo, it->second.lo);
                merged.hi = std::min(merged.hi, it->second.hi);
                if (merged.empty()) {
                  feasible = false;
                  break;
                }
              }
              local_max = std::max(local_max, interval_distance(x0[f], merged));
            }
            if (!feasible || local_max >= cand_dist) continue;
            // Largest remaining penalty among axes tree i does not touch.
            double rest_max = 0.0;
            for (const auto& [pen, axis] : rest_pens) {
              if (!leaf_box.iv.count(axis)) {
                rest_max = pen;
                break;
              }
            }
            dist = std::max(local_max, rest_max);
          }

          if (dist < cand_dist) {
            SparseBox full = rest;
            if (!full.intersect(leaf_box)) continue;
            cand_dist = dist;
            cand_point = full.project(x0);
          }
        }
      }

      if (cand_point.empty()) break;  // local optimum
      if (budget.exhausted()) break;
      const int observed = budget(cand_point);
      if (observed == y0) break;
      cur = std::move(cand_point);
      cur_label = observed;
      cur_dist = cand_dist;
      if (cfg.trace) {
        cfg.trace({cfg.sample_id, "lt", iter, cur_dist, budget.used()});
      }
    }

    if (cur_dist < best_dist) {
      best_dist = cur_dist;
      best_point = cur;
      best_label = cur_label;
      stale_restarts = 0;
    } else {
      ++stale_restarts;
    }
  }

  if (best_point.empty()) return make_failure(y0, budget.used());
  return make_success(x0, y0, std::move(best_point), best_label, budget.used());
}

}  // namespace treesym::attack
