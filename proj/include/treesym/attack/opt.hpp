#pragma once

#include <optional>
#include <random>
#include <vector>

#include "treesym/attack/common.hpp"

namespace treesym::attack {

namespace detail {

inline std::vector<double> gaussian_unit(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> u(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& v : u) {
      v = gauss(rng);
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : u) v *= inv;
  return u;
}

inline std::vector<double> normalized_sum(const std::vector<double>& a,
                                          const std::vector<double>& b,
                                          double scale_b) {
  std::vector<double> out(a.size());
  double norm2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] + scale_b * b[i];
    norm2 += out[i] * out[i];
  }
  if (norm2 == 0.0) return a;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
  return out;
}

inline std::vector<double> ray_point(const std::vector<double>& x0,
                                     const std::vector<double>& dir, double c) {
  std::vector<double> p(x0.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::clamp(x0[i] + c * dir[i], 0.0, 1.0);
  }
  return p;
}

struct RayHit {
  double c = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  int label = -1;
};

/// Distance-to-boundary along a clamped ray: expands until the label flips,
/// then bisects keeping (non-adversarial low, adversarial high). Returns the
/// adversarial endpoint; nothing when the ray never leaves the class.
inline std::optional<RayHit> ray_search(QueryBudget& budget,
                                        const std::vector<double>& x0, int y0,
                                        const std::vector<double>& dir,
                                        double tol, double c_max,
                                        double hint = 0.0) {
  double lo = 0.0;
  double hi = hint > 0.0 ? hint : 0.1;
  RayHit hit;
  bool found = false;
  while (!budget.exhausted()) {
    auto p = ray_point(x0, dir, hi);
    const int label = budget(p);
    if (label != y0) {
      hit.c = hi;
      hit.point = std::move(p);
      hit.label = label;
      found = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
    if (hi > c_max) return std::nullopt;
  }
  if (!found) return std::nullopt;
  while (hit.c - lo > tol && !budget.exhausted()) {
    const double mid = 0.5 * (lo + hit.c);
    auto p = ray_point(x0, dir, mid);
    const int label = budget(p);
    if (label != y0) {
      hit.c = mid;
      hit.point = std::move(p);
      hit.label = label;
    } else {
      lo = mid;
    }
  }
  return hit;
}

struct DirectionState {
  std::vector<double> theta;
  RayHit hit;
};

/// Shared initialization: the best of 20 random directions plus, when random
/// probing turns up an adversarial point, the direction toward it.
inline std::optional<DirectionState> best_initial_direction(
    QueryBudget& budget, const std::vector<double>& x0, int y0,
    std::mt19937_64& rng, double tol, double c_max) {
  std::vector<std::vector<double>> dirs;
  for (int i = 0; i < 20; ++i) dirs.push_back(gaussian_unit(x0.size(), rng));
  if (auto adv = find_initial_adversarial(budget, x0, y0, rng)) {
    std::vector<double> d(x0.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = adv->point[i] - x0[i];
      norm2 += d[i] * d[i];
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : d) v *= inv;
      dirs.push_back(std::move(d));
    }
  }
  std::optional<DirectionState> best;
  for (auto& dir : dirs) {
    if (budget.exhausted()) break;
    if (auto hit = ray_search(budget, x0, y0, dir, tol, c_max)) {
      if (!best || hit->c < best->hit.c) {
        best = DirectionState{std::move(dir), std::move(*hit)};
      }
    }
  }
  return best;
}

}  // namespace detail

/// Sign-only directional derivative estimate: one label query per direction
/// at the current radius decides whether g grew or shrank along it.
inline std::vector<double> signopt_estimate(
    QueryBudget& budget, const std::vector<double>& x0, int y0,
    const std::vector<double>& theta, double g_cur,
    const std::vector<std::vector<double>>& probes, double beta) {
  std::vector<double> estimate(x0.size(), 0.0);
  for (const auto& u : probes) {
    if (budget.exhausted()) break;
    const auto dir = detail::normalized_sum(theta, u, beta);
    const auto p = detail::ray_point(x0, dir, g_cur);
    const double sign = budget(p) == y0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) estimate[i] += sign * u[i];
  }
  const double inv = 1.0 / std::max<std::size_t>(1, probes.size());
  for (double& v : estimate) v *= inv;
  return estimate;
}

namespace detail {

template <bool SignOnly>
AttackResult opt_like_attack(const char* name, const LabelFn& classify,
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

  const double c_max = std::sqrt(static_cast<double>(d)) + 1.0;
  const double coarse_tol = std::max(cfg.search_tol, 0.01);
  const double g_fail = c_max;  // sentinel for directions that never flip

  auto best = best_initial_direction(budget, x0, y0, rng, coarse_tol, c_max);
  if (!best) return make_failure(y0, budget.used());

  std::vector<double> theta = best->theta;
  RayHit cur = best->hit;

  double alpha = 0.2 * cur.c;
  const int q = std::max(1, cfg.n_directions);
  for (int iter = 0; iter < 300 && !budget.exhausted(); ++iter) {
    std::vector<double> ghat(d, 0.0);
    if constexpr (SignOnly) {
      std::vector<std::vector<double>> probes;
      probes.reserve(q);
      for (int j = 0; j < q; ++j) probes.push_back(gaussian_unit(d, rng));
      ghat = signopt_estimate(budget, x0, y0, theta, cur.c, probes, cfg.fd_beta);
    } else {
      for (int j = 0; j < q && !budget.exhausted(); ++j) {
        const auto u = gaussian_unit(d, rng);
        const auto dir = normalized_sum(theta, u, cfg.fd_beta);
        const auto hit = ray_search(budget, x0, y0, dir, coarse_tol, c_max, cur.c);
        const double g_u = hit ? hit->c : g_fail;
        const double w = (g_u - cur.c) / cfg.fd_beta;
        for (std::size_t i = 0; i < d; ++i) ghat[i] += w * u[i] / q;
      }
    }
    double gnorm = 0.0;
    for (double v : ghat) gnorm += v * v;
    gnorm = std::sqrt(gnorm);
    if (gnorm < 1e-12) {
      alpha *= 0.5;
      if (alpha < 1e-4) break;
      continue;
    }

    bool improved = false;
    for (int bt = 0; bt < 10 && !budget.exhausted(); ++bt) {
      const auto theta_next = normalized_sum(theta, ghat, -alpha / gnorm);
      const auto hit = ray_search(budget, x0, y0, theta_next, coarse_tol, c_max, cur.c);
      if (hit && hit->c < cur.c) {
        theta = theta_next;
        cur = *hit;
        alpha *= 1.25;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (cfg.trace) cfg.trace({cfg.sample_id, name, iter, cur.c, budget.used()});
    if (!improved && alpha < 1e-4) break;
  }

  // Polish the final direction at the configured tolerance.
  if (auto hit = ray_search(budget, x0, y0, theta, cfg.search_tol, c_max, cur.c)) {
    if (hit->c <= cur.c) cur = std::move(*hit);
  }
  return make_success(x0, y0, std::move(cur.point), cur.label, budget.used());
}

}  // namespace detail

/// Zeroth-order minimization of the directional boundary distance g(theta),
/// with finite-difference gradient estimates over random directions.
inline AttackResult opt_attack(const LabelFn& classify,
                               const std::vector<double>& x0, int y0,
                               const AttackConfig& cfg) {
  return detail::opt_like_attack<false>("opt", classify, x0, y0, cfg);
}

/// Same search with sign-only directional derivatives: each probe costs a
/// single label query at the current radius.
inline AttackResult signopt_attack(const LabelFn& classify,
                                   const std::vector<double>& x0, int y0,
                                   const AttackConfig& cfg) {
  return detail::opt_like_attack<true>("signopt", classify, x0, y0, cfg);
}

}  // namespace treesym::attack
