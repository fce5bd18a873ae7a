#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bsvd/dense.hpp"
#include "bsvd/entry.hpp"
#include "bsvd/memory.hpp"

namespace bsvd {

/// Coordinate-form sparse matrix. The only representation ever held for a
/// full input. Canonical on construction: entries sorted row-major,
/// duplicates summed, exact zeros dropped.
class SparseTriplets {
 public:
  SparseTriplets() = default;
  /// Throws DimensionError when an index is outside rows × cols, UsageError on
  /// a non-finite value.
  SparseTriplets(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }

  friend bool operator==(const SparseTriplets&, const SparseTriplets&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Entry> entries_;
};

/// map[i] is the source index placed at output position i.
class Permutation {
 public:
  Permutation() = default;
  /// Throws UsageError unless `map` is a bijection on 0..size-1.
  explicit Permutation(std::vector<std::size_t> map);
  static Permutation identity(std::size_t n);

  std::size_t size() const { return map_.size(); }
  std::size_t operator[](std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& map() const { return map_; }
  Permutation inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// Cut indices of the 2×2 block view. Index < cut belongs to block 1.
struct BlockPartition {
  std::size_t row_cut = 0;
  std::size_t col_cut = 0;

  /// Throws DimensionError unless 0 < row_cut ≤ rows and 0 < col_cut ≤ cols.
  void validate(std::size_t rows, std::size_t cols) const;
  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

enum class BlockId { k11 = 11, k12 = 12, k21 = 21, k22 = 22 };

/// Throws UsageError for anything other than 11, 12, 21, 22.
BlockId block_id_from_int(int id);

/// Reads `row,col,value` lines. `#` lines and blank lines are skipped; an
/// optional leading `%%dims r c` fixes the shape, otherwise it is inferred
/// from the largest indices.
SparseTriplets parse_triplets(std::istream& in, bool one_based);
SparseTriplets read_triplets_file(const std::string& path, bool one_based);
/// Writes `%%dims` followed by 0-based triplets.
void write_triplets(std::ostream& out, const SparseTriplets& m);

double frobenius_sq(const SparseTriplets& m);
std::vector<double> row_norms(const SparseTriplets& m);
std::vector<double> col_norms(const SparseTriplets& m);
std::vector<double> row_square_norms(const SparseTriplets& m);
std::vector<double> col_square_norms(const SparseTriplets& m);

/// Entry (i, j) moves to (row_p⁻¹(i), col_p⁻¹(j)).
SparseTriplets permute(const SparseTriplets& m, const Permutation& row_p, const Permutation& col_p);
SparseTriplets transpose(const SparseTriplets& m);
SparseTriplets extract_block(const SparseTriplets& m, const BlockPartition& p, BlockId which);

DenseMatrix to_dense(const SparseTriplets& m);
SparseTriplets from_dense(const DenseMatrix& a);

/// m · b without densifying m.
DenseMatrix multiply(const SparseTriplets& m, const DenseMatrix& b);
/// xᵗ · y for sparse x, y with the same row count.
DenseMatrix multiply_tn(const SparseTriplets& x, const SparseTriplets& y);

/// Blocks of AᵗA at the column cut of `p`. When the dense G22 would not fit
/// the budget only its diagonal is kept.
struct GramBlocks {
  DenseMatrix g11;
  DenseMatrix g12;
  DenseMatrix g22;
  std::vector<double> g22_diagonal;
  bool g22_diagonal_only = false;

  double trace11() const;
  double trace22() const;
};

/// Accumulates the Gram blocks from the four sparse blocks of `m`
/// ((AᵗA)₁₁ = A₁₁ᵗA₁₁ + A₂₁ᵗA₂₁ and so on). Throws MemoryBudgetError naming
/// the block when G11 + G12 alone exceed `budget_bytes`.
GramBlocks gram_blockwise(const SparseTriplets& m, const BlockPartition& p,
                          std::size_t budget_bytes = memory::kUnlimited);

/// One row per line, comma separated, %.17g.
void write_dense_csv(std::ostream& out, const DenseMatrix& a);

}  // namespace bsvd
