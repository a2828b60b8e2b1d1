#ifndef NODEFLOW_SUBSET_HPP
#define NODEFLOW_SUBSET_HPP

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodeflow/errors.hpp"

namespace nodeflow {

/// Subset of one layer's nodes. Bit k-1 stands for the node with 1-based
/// index k, so layers are limited to 32 nodes by the representation and to
/// kMaxLayerWidth by the enumeration guards.
using Mask = std::uint32_t;

inline constexpr int kMaxLayerWidth = 16;

inline constexpr Mask full_mask(int width) {
  return width >= 32 ? ~Mask{0} : ((Mask{1} << width) - 1);
}

inline constexpr int popcount(Mask m) { return std::popcount(m); }

inline constexpr bool contains(Mask m, int index0) { return (m >> index0) & 1u; }

inline constexpr bool is_subset(Mask a, Mask b) { return (a & ~b) == 0; }

/// 1-based sorted index list -> mask.
inline Mask mask_from_indices(std::span<const int> indices, int width) {
  Mask m = 0;
  for (int k : indices) {
    if (k < 1 || k > width) {
      throw Error(ErrorCode::OutOfRange,
                  "node index " + std::to_string(k) + " outside [1," +
                      std::to_string(width) + "]");
    }
    m |= Mask{1} << (k - 1);
  }
  return m;
}

inline std::vector<int> indices_from_mask(Mask m) {
  std::vector<int> out;
  for (int k = 0; m != 0; ++k, m >>= 1) {
    if (m & 1u) out.push_back(k + 1);
  }
  return out;
}

/// Rank of a mask when its indicator vector (index 1 first) is compared
/// lexicographically: a smaller key means the earlier differing position
/// holds a 0.
inline constexpr std::uint32_t lex_key(Mask m, int width) {
  std::uint32_t key = 0;
  for (int k = 0; k < width; ++k) key = (key << 1) | ((m >> k) & 1u);
  return key;
}

/// Sum of per-index values over the members of m.
template <typename Values>
double sum_over(const Values& values, Mask m) {
  double s = 0.0;
  for (int k = 0; m != 0; ++k, m >>= 1) {
    if (m & 1u) s += values[static_cast<std::size_t>(k)];
  }
  return s;
}

/// Relative-absolute slack used by every inequality check.
inline double scaled_tol(double tol, double magnitude) {
  return tol * (magnitude > 1.0 ? magnitude : 1.0);
}

}  // namespace nodeflow

#endif  // NODEFLOW_SUBSET_HPP
