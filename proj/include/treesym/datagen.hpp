#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesym/dataset.hpp"

namespace treesym {

/// Seeded synthetic benchmark datasets. These are desk-scale stand-ins with
/// controlled difficulty: tabular sets are two Gaussian clusters plus label
/// noise, the image set is made of per-class blob constellations. Raw labels
/// mimic common LIBSVM conventions ({-1,+1} for binary, 0..C-1 for images).
struct SyntheticData {
  Dataset train;
  Dataset test;
  std::map<long, int> label_map;          // raw label -> class index
  std::map<int, long> class_to_raw;       // inverse, for writing files
};

namespace detail {

inline SyntheticData make_tabular_binary(std::uint64_t seed, int n_train,
                                         int n_test, int d,
                                         double label_flip_rate,
                                         double cluster_distance,
                                         double noise_sigma,
                                         double mirror_gap = 1.2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Cluster geometry compatible with the inversion symmetry: the pair
  // midpoint sits mirror_gap/2 away from the cube center along a random
  // direction u, and the two class centers split along an orthogonal
  // direction v. The inverted image of either class then stays mirror_gap
  // away from the other class, so augmented training data keeps four
  // separated clusters instead of cross-class collisions.
  auto random_unit = [&](std::vector<double>& out) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& x : out) {
        x = gauss(rng);
        norm2 += x * x;
      }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : out) x *= inv;
  };

  std::vector<double> mu0(d), mu1(d), u(d), v(d);
  if (d == 1) {
    // One dimension admits no orthogonal split; the mirror pair collapses
    // onto the classes themselves.
    mu0 = {0.5 - 0.5 * cluster_distance};
    mu1 = {0.5 + 0.5 * cluster_distance};
  } else {
    random_unit(u);
    double dot = 1.0;
    while (std::abs(dot) > 0.99) {
      random_unit(v);
      dot = 0.0;
      for (int f = 0; f < d; ++f) dot += u[f] * v[f];
    }
    double vnorm2 = 0.0;
    for (int f = 0; f < d; ++f) {
      v[f] -= dot * u[f];
      vnorm2 += v[f] * v[f];
    }
    const double vinv = 1.0 / std::sqrt(vnorm2);
    for (int f = 0; f < d; ++f) {
      const double mid = 0.5 + 0.5 * mirror_gap * u[f];
      const double split = 0.5 * cluster_distance * v[f] * vinv;
      mu0[f] = std::clamp(mid - split, 0.0, 1.0);
      mu1[f] = std::clamp(mid + split, 0.0, 1.0);
    }
  }

  std::bernoulli_distribution pick_class(0.5);
  std::bernoulli_distribution flip(label_flip_rate);

  auto fill = [&](Dataset& ds, int n) {
    ds.n_features = d;
    ds.n_classes = 2;
    std::vector<double> x(d);
    for (int i = 0; i < n; ++i) {
      const int structural = pick_class(rng) ? 1 : 0;
      const std::vector<double>& mu = structural == 1 ? mu1 : mu0;
      for (int f = 0; f < d; ++f) {
        x[f] = std::clamp(mu[f] + noise_sigma * gauss(rng), 0.0, 1.0);
      }
      const int label = flip(rng) ? 1 - structural : structural;
      ds.push_row(x, label);
    }
  };

  SyntheticData out;
  fill(out.train, n_train);
  fill(out.test, n_test);
  out.label_map = {{-1, 0}, {+1, 1}};
  out.class_to_raw = {{0, -1}, {1, +1}};
  return out;
}

}  // namespace detail

/// Generic two-cluster binary tabular set; the named datasets below are
/// presets of this generator.
inline SyntheticData make_tabular(std::uint64_t seed, int n_train, int n_test,
                                  int d, double label_flip_rate = 0.10,
                                  double cluster_distance = 1.0,
                                  double noise_sigma = 0.18) {
  return detail::make_tabular_binary(seed, n_train, n_test, d, label_flip_rate,
                                     cluster_distance, noise_sigma);
}

/// 546/137 rows, 10 features, 2 classes. The mirror gap is kept moderate so
/// the augmented cluster halves interact near the boundary; fully separated
/// halves train a nearly invariant model, which defeats the point of the
/// inversion diagnostics.
inline SyntheticData make_bc10(std::uint64_t seed) {
  return detail::make_tabular_binary(seed, 546, 137, 10,
                                     /*label_flip_rate=*/0.12,
                                     /*cluster_distance=*/1.0,
                                     /*noise_sigma=*/0.18,
                                     /*mirror_gap=*/0.95);
}

/// 614/154 rows, 8 features, 2 classes.
inline SyntheticData make_dia8(std::uint64_t seed) {
  return detail::make_tabular_binary(seed, 614, 154, 8,
                                     /*label_flip_rate=*/0.10,
                                     /*cluster_distance=*/1.0,
                                     /*noise_sigma=*/0.18);
}

/// 28x28 four-class image set, 2000/400 rows: each class is a constellation
/// of three soft blobs with per-sample jitter over a noisy dark background.
inline SyntheticData make_fmnist4(std::uint64_t seed, int n_train = 2000,
                                  int n_test = 400) {
  constexpr int kSide = 28;
  constexpr int kClasses = 4;
  constexpr int kBlobs = 3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(5.0, 22.0);
  std::uniform_real_distribution<double> radius(2.0, 3.2);
  std::uniform_real_distribution<double> amp(0.55, 0.95);

  struct Blob {
    double r, c, radius, amp;
  };
  std::vector<std::array<Blob, kBlobs>> blobs(kClasses);
  for (int k = 0; k < kClasses; ++k) {
    for (int j = 0; j < kBlobs; ++j) {
      blobs[k][j] = Blob{center(rng), center(rng), radius(rng), amp(rng)};
    }
  }

  std::uniform_int_distribution<int> pick_class(0, kClasses - 1);
  std::uniform_real_distribution<double> jitter(-2.8, 2.8);
  std::uniform_real_distribution<double> amp_jitter(0.7, 1.3);
  std::uniform_real_distribution<double> radius_jitter(0.8, 1.2);
  std::uniform_real_distribution<double> background(-0.05, 0.11);
  std::bernoulli_distribution flip_label(0.07);
  std::uniform_int_distribution<int> other_class(1, kClasses - 1);

  auto fill = [&](Dataset& ds, int n) {
    ds.n_features = kSide * kSide;
    ds.n_classes = kClasses;
    ds.image_shape = ImageShape{kSide, kSide};
    std::vector<double> img(kSide * kSide);
    for (int i = 0; i < n; ++i) {
      const int k = pick_class(rng);
      std::array<Blob, kBlobs> b = blobs[k];
      for (Blob& blob : b) {
        blob.r += jitter(rng);
        blob.c += jitter(rng);
        blob.amp *= amp_jitter(rng);
        blob.radius *= radius_jitter(rng);
      }
      for (int r = 0; r < kSide; ++r) {
        for (int c = 0; c < kSide; ++c) {
          double v = std::max(0.0, background(rng));
          for (const Blob& blob : b) {
            const double dr = r - blob.r;
            const double dc = c - blob.c;
            v += blob.amp *
                 std::exp(-(dr * dr + dc * dc) / (2.0 * blob.radius * blob.radius));
          }
          img[r * kSide + c] = std::clamp(v, 0.0, 1.0);
        }
      }
      const int label = flip_label(rng) ? (k + other_class(rng)) % kClasses : k;
      ds.push_row(img, label);
    }
  };

  SyntheticData out;
  fill(out.train, n_train);
  fill(out.test, n_test);
  for (int k = 0; k < kClasses; ++k) {
    out.label_map[k] = k;
    out.class_to_raw[k] = k;
  }
  return out;
}

inline SyntheticData make_synthetic(const std::string& name, std::uint64_t seed) {
  if (name == "bc10") return make_bc10(seed);
  if (name == "dia8") return make_dia8(seed);
  if (name == "fmnist4") return make_fmnist4(seed);
  throw std::invalid_argument("make_synthetic: unknown dataset '" + name +
                              "' (expected bc10, dia8 or fmnist4)");
}

/// Writes LIBSVM text with 1-based indices; exact zeros are omitted.
inline void write_libsvm(const Dataset& ds, const std::map<int, long>& class_to_raw,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_libsvm: cannot write '" + path + "'");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    out << class_to_raw.at(ds.labels[i]);
    const double* row = ds.row(i);
    for (int f = 0; f < ds.n_features; ++f) {
      if (row[f] != 0.0) out << ' ' << (f + 1) << ':' << row[f];
    }
    out << '\n';
  }
}

}  // namespace treesym
