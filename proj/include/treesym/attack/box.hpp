#pragma once

#include <limits>
#include <map>
#include <vector>

#include "treesym/attack/common.hpp"
#include "treesym/gbdt.hpp"

namespace treesym::attack {

/// Half-open feature interval [lo, hi). `lo` is inclusive because routing
/// sends v == threshold to the right branch; `hi` is exclusive for the same
/// reason. Unconstrained sides stay at the domain defaults.
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool empty() const { return !(lo < hi); }
  bool contains(double v) const { return v >= lo && v < hi; }
};

/// Closest admissible value to x inside the interval, honoring inclusivity:
/// landing on `lo` is exact, approaching `hi` stops kBoundaryEps short.
inline double place_in_interval(double x, const Interval& iv) {
  if (x < iv.lo) return iv.lo;
  if (x >= iv.hi) {
    const double below = iv.hi - kBoundaryEps;
    return below >= iv.lo ? below : iv.lo;
  }
  return x;
}

inline double interval_distance(double x, const Interval& iv) {
  return std::abs(x - place_in_interval(x, iv));
}

/// Axis-aligned region as a sparse feature -> interval map; features absent
/// from the map are unconstrained.
struct SparseBox {
  std::map<int, Interval> iv;

  /// Intersects one axis; returns false when the box becomes empty.
  bool intersect_axis(int feature, const Interval& o) {
    auto [it, inserted] = iv.emplace(feature, o);
    if (!inserted) {
      it->second.lo = std::max(it->second.lo, o.lo);
      it->second.hi = std::min(it->second.hi, o.hi);
    }
    return !it->second.empty();
  }

  bool intersect(const SparseBox& other) {
    for (const auto& [f, o] : other.iv) {
      if (!intersect_axis(f, o)) return false;
    }
    return true;
  }

  bool feasible() const {
    for (const auto& [f, o] : iv) {
      (void)f;
      if (o.empty()) return false;
    }
    return true;
  }

  bool contains(const std::vector<double>& x) const {
    for (const auto& [f, o] : iv) {
      if (!o.contains(x[f])) return false;
    }
    return true;
  }

  /// Projection of x onto the box; coordinates off constrained axes pass
  /// through untouched.
  std::vector<double> project(const std::vector<double>& x) const {
    std::vector<double> out = x;
    for (const auto& [f, o] : iv) out[f] = place_in_interval(x[f], o);
    return out;
  }

  double project_distance(const std::vector<double>& x, Norm norm) const {
    if (norm == Norm::L2) {
      double s = 0.0;
      for (const auto& [f, o] : iv) {
        const double d = interval_distance(x[f], o);
        s += d * d;
      }
      return std::sqrt(s);
    }
    double m = 0.0;
    for (const auto& [f, o] : iv) m = std::max(m, interval_distance(x[f], o));
    return m;
  }
};

/// Leaf regions of one tree, indexed by leaf node id.
struct TreeLeafBoxes {
  std::vector<int> leaf_ids;
  std::map<int, SparseBox> box_by_leaf;
};

inline TreeLeafBoxes leaf_boxes(const Tree& tree) {
  TreeLeafBoxes out;
  struct Frame {
    int node;
    SparseBox box;
  };
  std::vector<Frame> stack;
  stack.push_back({0, SparseBox{}});
  while (!stack.empty()) {
    Frame fr = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = tree.nodes[fr.node];
    if (n.is_leaf()) {
      out.leaf_ids.push_back(fr.node);
      out.box_by_leaf.emplace(fr.node, std::move(fr.box));
      continue;
    }
    Frame left{n.left, fr.box};
    left.box.intersect_axis(n.feature, Interval{0.0, n.threshold});
    Frame right{n.right, std::move(fr.box)};
    right.box.intersect_axis(n.feature,
                             Interval{n.threshold, std::numeric_limits<double>::infinity()});
    // Unreachable branches (contradictory thresholds on a path) are dropped.
    if (!left.box.feasible()) {
      stack.push_back(std::move(right));
    } else if (!right.box.feasible()) {
      stack.push_back(std::move(left));
    } else {
      stack.push_back(std::move(left));
      stack.push_back(std::move(right));
    }
  }
  return out;
}

}  // namespace treesym::attack
