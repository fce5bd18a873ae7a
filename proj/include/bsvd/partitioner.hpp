#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bsvd/sparse.hpp"

namespace bsvd {

struct PortraitResult {
  SparseTriplets matrix;
  bool transposed = false;
};

/// Transposes when there are fewer rows than columns.
PortraitResult ensure_portrait(const SparseTriplets& m);

struct SortPermutations {
  Permutation row_p;
  Permutation col_p;
};

/// Stable, non-increasing by (squared) norm.
SortPermutations sort_by_norms(const SparseTriplets& m);

/// col_cut = smallest k whose leading column square norms reach
/// fraction·‖m‖²_F; row_cut = col_cut. Throws DegenerateCutError when every
/// column is needed (or the matrix is too short for a square block) and
/// UsageError for a fraction outside (0, 1).
BlockPartition choose_cut(const SparseTriplets& sorted, double fraction);

struct BlockStats {
  std::string block;  ///< "11", "12", "21", "22", "whole"
  std::size_t rows = 0;
  std::size_t cols = 0;
  double density = 0.0;
  double square_norm = 0.0;
  double norm_percentage = 0.0;
};

struct PartitionReport {
  std::vector<BlockStats> blocks;  ///< 11, 12, 21, 22, then the whole matrix
};

PartitionReport partition_report(const SparseTriplets& m, const BlockPartition& p);

/// TSV with a BLOCK, ROWS, COLUMNS, DENSITY, SQUARE NORM, NORM PERCENTAGE
/// header; density and percentage as percentages.
void write_partition_tsv(std::ostream& out, const PartitionReport& r);

}  // namespace bsvd
