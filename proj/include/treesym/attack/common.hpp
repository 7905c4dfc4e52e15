#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesym/gbdt.hpp"

namespace treesym::attack {

enum class Norm { L2, Linf };

inline const char* to_string(Norm n) { return n == Norm::L2 ? "l2" : "linf"; }

/// Offset used when a point must sit strictly below an exclusive box bound.
inline constexpr double kBoundaryEps = 1e-9;

struct TraceRecord {
  int sample_id = -1;
  std::string attack;
  int iteration = 0;
  double best_norm = std::numeric_limits<double>::infinity();
  long queries = 0;
};

using TraceFn = std::function<void(const TraceRecord&)>;

struct AttackConfig {
  Norm norm = Norm::Linf;
  long max_queries = 20000;
  std::uint64_t seed = 0;

  // cube
  int cube_iters = 1000;         // inner random-search iterations per epsilon
  double cube_subset_prob = 0.0; // <=0 resolves to max(1/d, 0.1)
  double cube_init_eps = 1.0;
  double cube_eps_tol = 1e-3;

  // opt / signopt
  int n_directions = 10;         // random probes per gradient estimate
  double fd_beta = 0.01;         // finite-difference step
  double search_tol = 1e-4;      // ray-search bisection tolerance

  // hsja
  int hsja_init_grad_samples = 24;
  double hsja_bs_tol = 1e-4;     // boundary binary-search tolerance

  // lt
  int lt_restarts = 5;
  int lt_max_no_improve = 2;     // restarts tolerated without global progress

  int sample_id = -1;            // echoed into trace records
  TraceFn trace;                 // optional per-iteration hook
};

struct AttackResult {
  std::optional<std::vector<double>> adversarial;
  bool success = false;
  double l2 = std::numeric_limits<double>::infinity();
  double linf = std::numeric_limits<double>::infinity();
  long queries = 0;
  int original_label = -1;
  int adversarial_label = -1;
};

inline void validate(const AttackConfig& cfg) {
  if (cfg.max_queries <= 0 || cfg.cube_iters <= 0 || cfg.n_directions <= 0 ||
      cfg.hsja_init_grad_samples <= 0 || cfg.lt_restarts <= 0) {
    throw std::invalid_argument("attack config: budgets must be positive");
  }
  for (double tol : {cfg.cube_eps_tol, cfg.search_tol, cfg.hsja_bs_tol}) {
    if (!(tol > 0.0 && tol <= 0.1)) {
      throw std::invalid_argument("attack config: tolerances must lie in (0, 0.1]");
    }
  }
}

using LabelFn = std::function<int(const std::vector<double>&)>;

inline LabelFn ensemble_label_fn(const Ensemble& ens) {
  return [&ens](const std::vector<double>& x) { return predict_label(ens, x); };
}

inline double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double linf_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm_dist(Norm n, const std::vector<double>& a,
                        const std::vector<double>& b) {
  return n == Norm::L2 ? l2_dist(a, b) : linf_dist(a, b);
}

inline void clamp01(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

/// Counts label queries against a fixed budget. Every attack routes its
/// classifier access through one of these.
class QueryBudget {
 public:
  QueryBudget(LabelFn fn, long max_queries)
      : fn_(std::move(fn)), max_queries_(max_queries) {}

  int operator()(const std::vector<double>& x) {
    ++used_;
    return fn_(x);
  }

  /// Charges one query without invoking the label function; used when a
  /// white-box evaluation replaces the label call.
  void charge() { ++used_; }

  bool exhausted() const { return used_ >= max_queries_; }
  long used() const { return used_; }
  long remaining() const { return std::max(0L, max_queries_ - used_); }

 private:
  LabelFn fn_;
  long max_queries_ = 0;
  long used_ = 0;
};

inline AttackResult make_failure(int y0, long queries) {
  AttackResult r;
  r.success = false;
  r.original_label = y0;
  r.queries = queries;
  return r;
}

inline AttackResult make_success(const std::vector<double>& x0, int y0,
                                 std::vector<double> adv, int adv_label,
                                 long queries) {
  AttackResult r;
  r.l2 = l2_dist(adv, x0);
  r.linf = linf_dist(adv, x0);
  r.adversarial = std::move(adv);
  r.success = true;
  r.original_label = y0;
  r.adversarial_label = adv_label;
  r.queries = queries;
  return r;
}

struct InitialPoint {
  std::vector<double> point;
  int label = -1;
};

/// Uniform random probes over [0,1]^d until the label differs from y0.
/// Probe count follows 10*d, capped so high-dimensional searches cannot
/// swallow the whole budget.
inline std::optional<InitialPoint> find_initial_adversarial(
    QueryBudget& classify, const std::vector<double>& x0, int y0,
    std::mt19937_64& rng, long max_probes = -1) {
  const std::size_t d = x0.size();
  if (max_probes < 0) max_probes = std::min<long>(10 * static_cast<long>(d), 2000);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> p(d);
  for (long probe = 0; probe < max_probes && !classify.exhausted(); ++probe) {
    for (double& v : p) v = unif(rng);
    const int label = classify(p);
    if (label != y0) return InitialPoint{p, label};
  }
  return std::nullopt;
}

/// Shrinks the segment between a non-adversarial and an adversarial point
/// until the endpoints are within tol of each other, preserving the
/// (non-adversarial low, adversarial high) invariant. For Norm::Linf the
/// interpolation clips toward x_in per coordinate instead of blending, which
/// is the projection HSJA uses for L-infinity attacks.
struct BoundaryPair {
  std::vector<double> adv;      // adversarial side
  std::vector<double> non_adv;  // clean side
  int adv_label = -1;
};

inline BoundaryPair bisect_to_boundary(QueryBudget& classify,
                                       const std::vector<double>& x_in, int y0,
                                       std::vector<double> x_adv,
                                       int x_adv_label, double tol,
                                       Norm norm = Norm::L2) {
  std::vector<double> lo = x_in;  // non-adversarial end
  std::vector<double> hi = std::move(x_adv);
  int hi_label = x_adv_label;
  std::vector<double> mid(lo.size());
  while (norm_dist(norm, lo, hi) > tol && !classify.exhausted()) {
    if (norm == Norm::L2) {
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
    } else {
      const double alpha = 0.5 * linf_dist(x_in, hi);
      for (std::size_t i = 0; i < mid.size(); ++i) {
        mid[i] = std::clamp(hi[i], x_in[i] - alpha, x_in[i] + alpha);
      }
      if (linf_dist(mid, hi) == 0.0) break;  // cannot tighten further
    }
    const int label = classify(mid);
    if (label != y0) {
      hi = mid;
      hi_label = label;
    } else {
      lo = mid;
    }
  }
  return BoundaryPair{std::move(hi), std::move(lo), hi_label};
}

/// Margin toward misclassification: positive means the runner-up class beats
/// the true one. Used as the white-box acceptance signal for cube.
inline double adversarial_margin(const Ensemble& ens,
                                 const std::vector<double>& margins, int y0) {
  if (ens.objective == Objective::BinaryLogistic) {
    return y0 == 1 ? -margins[0] : margins[0];
  }
  double best_other = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < ens.n_classes; ++k) {
    if (k != y0) best_other = std::max(best_other, margins[k]);
  }
  return best_other - margins[y0];
}

}  // namespace treesym::attack
