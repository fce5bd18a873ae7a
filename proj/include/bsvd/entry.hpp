#pragma once

#include <compare>
#include <cstddef>

namespace bsvd {

/// One stored coordinate of a sparse matrix, 0-based.
struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

}  // namespace bsvd
