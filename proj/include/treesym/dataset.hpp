#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "treesym/symmetry.hpp"

namespace treesym {

/// Dense sample matrix with integer class labels. Feature values are raw on
/// ingestion and land in [0,1] once a NormalizationSpec has been applied.
struct Dataset {
  std::vector<double> values;  // row-major, n_rows() x n_features
  std::vector<int> labels;
  int n_features = 0;
  int n_classes = 0;
  std::optional<ImageShape> image_shape;

  std::size_t n_rows() const { return labels.size(); }

  const double* row(std::size_t i) const {
    return values.data() + i * static_cast<std::size_t>(n_features);
  }

  std::vector<double> row_vec(std::size_t i) const {
    const double* p = row(i);
    return std::vector<double>(p, p + n_features);
  }

  void push_row(const std::vector<double>& x, int label) {
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(label);
  }
};

/// Per-feature min/max of the training set; applied as (v-min)/(max-min)
/// with clamping into [0,1]. Constant features map to 0.
struct NormalizationSpec {
  std::vector<double> per_feature_min;
  std::vector<double> per_feature_max;

  int n_features() const { return static_cast<int>(per_feature_min.size()); }

  bool operator==(const NormalizationSpec&) const = default;
};

namespace detail {

inline double parse_double(std::string_view tok, int line_no,
                           const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("libsvm parse error at line " +
                             std::to_string(line_no) + ": bad " + what +
                             " '" + std::string(tok) + "'");
  }
  return v;
}

inline long parse_long(std::string_view tok, int line_no, const char* what) {
  long v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;  // from_chars rejects '+'
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error("libsvm parse error at line " +
                             std::to_string(line_no) + ": bad " + what +
                             " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace detail

/// Reads LIBSVM text: `<label> <idx>:<val> ...`, 1-based strictly increasing
/// indices, absent indices treated as 0. Raw labels are remapped through
/// `label_map`; values come back unnormalized.
inline Dataset load_libsvm(const std::string& path, int n_features,
                           const std::map<long, int>& label_map,
                           std::optional<ImageShape> image_shape = {}) {
  if (n_features <= 0) throw std::invalid_argument("load_libsvm: n_features must be positive");
  if (image_shape &&
      static_cast<long>(image_shape->height) * image_shape->width != n_features) {
    throw std::invalid_argument("load_libsvm: image shape does not match n_features");
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_libsvm: cannot open '" + path + "'");

  Dataset ds;
  ds.n_features = n_features;
  ds.image_shape = image_shape;
  int n_classes = 0;
  for (const auto& [raw, idx] : label_map) {
    (void)raw;
    if (idx < 0) throw std::invalid_argument("load_libsvm: negative class index in label_map");
    n_classes = std::max(n_classes, idx + 1);
  }
  ds.n_classes = n_classes;

  std::string line;
  int line_no = 0;
  std::vector<double> row(static_cast<std::size_t>(n_features));
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok[0] == '#') {
      throw std::runtime_error("libsvm parse error at line " +
                               std::to_string(line_no) + ": comments not supported");
    }
    const long raw_label = detail::parse_long(tok, line_no, "label");
    auto it = label_map.find(raw_label);
    if (it == label_map.end()) {
      throw std::runtime_error("libsvm label error at line " +
                               std::to_string(line_no) + ": unmapped raw label " +
                               std::to_string(raw_label));
    }
    std::fill(row.begin(), row.end(), 0.0);
    long prev_idx = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw std::runtime_error("libsvm parse error at line " +
                                 std::to_string(line_no) + ": bad pair '" + tok + "'");
      }
      const long idx = detail::parse_long(tok.substr(0, colon), line_no, "feature index");
      const double val =
          detail::parse_double(std::string_view(tok).substr(colon + 1), line_no, "feature value");
      if (idx <= prev_idx) {
        throw std::runtime_error("libsvm parse error at line " +
                                 std::to_string(line_no) +
                                 ": indices must be strictly increasing");
      }
      if (idx > n_features) {
        throw std::runtime_error("libsvm bounds error at line " +
                                 std::to_string(line_no) + ": index " +
                                 std::to_string(idx) + " > n_features " +
                                 std::to_string(n_features));
      }
      row[static_cast<std::size_t>(idx - 1)] = val;
      prev_idx = idx;
    }
    ds.push_row(row, it->second);
  }
  return ds;
}

/// Infers a label map from a LIBSVM file: distinct raw labels in ascending
/// order become class indices 0..C-1.
inline std::map<long, int> infer_label_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("infer_label_map: cannot open '" + path + "'");
  std::set<long> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok[0] == '#') {
      throw std::runtime_error("libsvm parse error at line " +
                               std::to_string(line_no) + ": comments not supported");
    }
    raw.insert(detail::parse_long(tok, line_no, "label"));
  }
  std::map<long, int> map;
  int next = 0;
  for (long r : raw) map[r] = next++;
  return map;
}

inline NormalizationSpec fit_normalizer(const Dataset& train) {
  if (train.n_rows() == 0) throw std::invalid_argument("fit_normalizer: empty dataset");
  NormalizationSpec spec;
  spec.per_feature_min.assign(train.n_features, 0.0);
  spec.per_feature_max.assign(train.n_features, 0.0);
  for (int f = 0; f < train.n_features; ++f) {
    double lo = train.row(0)[f];
    double hi = lo;
    for (std::size_t i = 1; i < train.n_rows(); ++i) {
      lo = std::min(lo, train.row(i)[f]);
      hi = std::max(hi, train.row(i)[f]);
    }
    spec.per_feature_min[f] = lo;
    spec.per_feature_max[f] = hi;
  }
  return spec;
}

inline double normalize_value(const NormalizationSpec& spec, int feature,
                              double v) {
  const double lo = spec.per_feature_min[feature];
  const double hi = spec.per_feature_max[feature];
  if (!(hi > lo)) return 0.0;  // constant feature
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

inline Dataset apply_normalizer(const NormalizationSpec& spec,
                                const Dataset& data) {
  if (spec.n_features() != data.n_features) {
    throw std::invalid_argument("apply_normalizer: feature count mismatch");
  }
  Dataset out = data;
  for (std::size_t i = 0; i < out.n_rows(); ++i) {
    double* row = out.values.data() + i * static_cast<std::size_t>(out.n_features);
    for (int f = 0; f < out.n_features; ++f) row[f] = normalize_value(spec, f, row[f]);
  }
  return out;
}

inline std::vector<double> normalize_sample(const NormalizationSpec& spec,
                                            const std::vector<double>& x) {
  if (spec.n_features() != static_cast<int>(x.size())) {
    throw std::invalid_argument("normalize_sample: feature count mismatch");
  }
  std::vector<double> out(x.size());
  for (int f = 0; f < spec.n_features(); ++f) out[f] = normalize_value(spec, f, x[f]);
  return out;
}

/// Expands each row into its images under `symmetries`, symmetry-major within
/// each source row and rows in their original order, so the result is
/// deterministic. Id must be in the set.
inline Dataset augment(const Dataset& data, const std::set<Symmetry>& symmetries) {
  if (!symmetries.count(Symmetry::Id)) {
    throw std::invalid_argument("augment: Id must be part of the symmetry set");
  }
  bool needs_shape = false;
  for (Symmetry s : symmetries) needs_shape |= involves_flip(s);
  if (needs_shape && !data.image_shape) {
    throw std::invalid_argument("augment: flip symmetry requires an image shape");
  }
  Dataset out;
  out.n_features = data.n_features;
  out.n_classes = data.n_classes;
  out.image_shape = data.image_shape;
  out.values.reserve(data.values.size() * symmetries.size());
  out.labels.reserve(data.labels.size() * symmetries.size());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    const std::vector<double> x = data.row_vec(i);
    for (Symmetry s : symmetries) {
      out.push_row(apply_symmetry(x, s, data.image_shape), data.labels[i]);
    }
  }
  return out;
}

}  // namespace treesym
