#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace treesym {

struct ImageShape {
  int height = 0;
  int width = 0;

  bool operator==(const ImageShape&) const = default;
};

/// Element of the Klein four-group generated by feature inversion and
/// horizontal image flip. The two-bit encoding makes composition a XOR,
/// so closure, identity and self-inverse hold by construction.
enum class Symmetry : unsigned {
  Id = 0,
  Invert = 1,
  Flip = 2,
  InvertFlip = 3,
};

inline constexpr Symmetry kAllSymmetries[4] = {
    Symmetry::Id, Symmetry::Invert, Symmetry::Flip, Symmetry::InvertFlip};

/// Group-vote evaluation order. Kept distinct from the enum order on purpose:
/// ties are broken by the earliest entry of this sequence.
inline constexpr Symmetry kVoteOrder[4] = {
    Symmetry::Id, Symmetry::Flip, Symmetry::Invert, Symmetry::InvertFlip};

inline const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::Id: return "id";
    case Symmetry::Invert: return "invert";
    case Symmetry::Flip: return "flip";
    case Symmetry::InvertFlip: return "invert_flip";
  }
  return "?";
}

inline Symmetry compose(Symmetry a, Symmetry b) {
  return static_cast<Symmetry>(static_cast<unsigned>(a) ^
                               static_cast<unsigned>(b));
}

inline bool involves_flip(Symmetry s) {
  return static_cast<unsigned>(s) & static_cast<unsigned>(Symmetry::Flip);
}

inline bool involves_invert(Symmetry s) {
  return static_cast<unsigned>(s) & static_cast<unsigned>(Symmetry::Invert);
}

/// a -> 1 - a, elementwise. Values are expected to lie in [0,1].
inline std::vector<double> invert(const std::vector<double>& sample) {
  std::vector<double> out(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) out[i] = 1.0 - sample[i];
  return out;
}

/// Horizontal mirror of a row-major image: pixel (r, c) -> (r, w-1-c).
inline std::vector<double> hflip(const std::vector<double>& sample,
                                 ImageShape shape) {
  if (shape.height <= 0 || shape.width <= 0 ||
      static_cast<std::size_t>(shape.height) *
              static_cast<std::size_t>(shape.width) !=
          sample.size()) {
    throw std::invalid_argument("hflip: image shape does not match sample size");
  }
  std::vector<double> out(sample.size());
  for (int r = 0; r < shape.height; ++r) {
    const std::size_t row = static_cast<std::size_t>(r) * shape.width;
    for (int c = 0; c < shape.width; ++c) {
      out[row + c] = sample[row + (shape.width - 1 - c)];
    }
  }
  return out;
}

/// Applies one group element. Invert and flip act on disjoint aspects of the
/// sample (values vs. positions), so the composite is order independent.
inline std::vector<double> apply_symmetry(const std::vector<double>& sample,
                                          Symmetry s,
                                          std::optional<ImageShape> shape) {
  if (involves_flip(s) && !shape.has_value()) {
    throw std::invalid_argument(
        "apply_symmetry: flip requested but no image shape given");
  }
  std::vector<double> out =
      involves_flip(s) ? hflip(sample, *shape) : sample;
  if (involves_invert(s)) {
    for (double& v : out) v = 1.0 - v;
  }
  return out;
}

}  // namespace treesym
