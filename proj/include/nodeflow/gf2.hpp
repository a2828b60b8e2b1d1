#ifndef NODEFLOW_GF2_HPP
#define NODEFLOW_GF2_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace nodeflow::gf2 {

/// Rank over GF(2) of a matrix whose rows are packed into 64-bit words
/// (bit j = column j). Gaussian elimination keyed on the leading bit.
inline int rank(std::span<const std::uint64_t> rows) {
  std::array<std::uint64_t, 64> pivot{};  // pivot[b] has leading bit b
  int r = 0;
  for (std::uint64_t row : rows) {
    while (row != 0) {
      const int lead = 63 - std::countl_zero(row);
      if (pivot[lead] == 0) {
        pivot[lead] = row;
        ++r;
        break;
      }
      row ^= pivot[lead];
    }
  }
  return r;
}

/// Rank of the submatrix with the given row set and column mask.
inline int submatrix_rank(std::span<const std::uint64_t> rows, std::uint64_t row_mask,
                          std::uint64_t col_mask) {
  std::vector<std::uint64_t> picked;
  picked.reserve(static_cast<std::size_t>(std::popcount(row_mask)));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if ((row_mask >> i) & 1u) picked.push_back(rows[i] & col_mask);
  }
  return rank(picked);
}

}  // namespace nodeflow::gf2

#endif  // NODEFLOW_GF2_HPP
