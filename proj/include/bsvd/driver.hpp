#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bsvd/dense.hpp"
#include "bsvd/partitioner.hpp"
#include "bsvd/sparse.hpp"
#include "bsvd/trace_maximizer.hpp"

namespace bsvd {

struct RunConfig {
  std::string input;
  bool one_based = false;
  double fraction = 2.0 / 3.0;
  double ratio_tol = 1e-4;
  std::size_t max_iters = 500;
  double tol_rank = 1e-12;
  std::size_t budget_bytes = 0;  ///< 0 = auto_budget
  std::string out_dir;
  std::uint64_t seed = 42;
  bool full = false;

  /// Throws UsageError on out-of-range values.
  void validate() const;
};

struct Provenance {
  Permutation row_p;  ///< sorted position → row of the portrait matrix
  Permutation col_p;
  bool transposed = false;
  BlockPartition partition;
  std::string method;  ///< "block" or "baseline"
  std::vector<std::string> notes;
};

/// Factors are in the frame of the input matrix: rows of u_slice index input
/// rows, rows of v_slice index input columns.
struct DecomposeResult {
  DiagonalMatrix singular_values;
  DenseMatrix u_slice;
  DenseMatrix v_slice;
  std::vector<IterationRecord> iteration_log;
  std::optional<PartitionReport> partition_report;
  Provenance provenance;
  bool converged = true;
  double initial_ratio = 0.0;
  double final_ratio = 0.0;
  std::size_t budget_bytes = 0;
  memory::Stats memory;
  std::vector<double> full_spectrum;  ///< filled by --full
};

/// 8 bytes times the element count of the largest of the four blocks.
std::size_t block_budget(const SparseTriplets& sorted, const BlockPartition& p);
/// Dense state the iteration cannot do without: G and V (N² each), step
/// scratch, and the rows × cut left factor.
std::size_t working_set_floor(const SparseTriplets& sorted, const BlockPartition& p);
/// Budget used when none is configured: the larger of the two above.
std::size_t auto_budget(const SparseTriplets& sorted, const BlockPartition& p);

/// The blockwise pipeline. A degenerate cut falls back to run_baseline with
/// a note. An iteration limit leaves converged = false with the factors
/// assembled from the last state.
DecomposeResult run_decompose(const SparseTriplets& a, const RunConfig& cfg);
DecomposeResult run_decompose(const RunConfig& cfg);

/// u = A·V·D⁻¹ from the four sparse blocks of the sorted matrix.
DenseMatrix assemble_economy(const SparseTriplets& sorted, const BlockPartition& p, const DenseMatrix& v,
                             const DiagonalMatrix& d);

/// Gram-route economy SVD of the whole input; budget-gated when
/// cfg.budget_bytes is set.
DecomposeResult run_baseline(const SparseTriplets& a, const RunConfig& cfg);
DecomposeResult run_baseline(const RunConfig& cfg);

struct ComparisonReport {
  std::size_t k = 0;
  std::vector<double> abs_diff;
  std::vector<double> rel_diff;

  /// Largest relative difference over the first k − skip_tail values.
  double max_rel(std::size_t skip_tail = 0) const;
  /// Largest relative difference over the last `tail` values.
  double max_rel_tail(std::size_t tail) const;
};

/// Top-k comparison; k = 0 means the shorter spectrum. Throws UsageError when
/// either result has fewer than k values.
ComparisonReport compare(const DecomposeResult& a, const DecomposeResult& b, std::size_t k = 0);

/// Term-document-like counts: column j is hit with probability ∝ (j+1)^−zipf
/// (capped at 1, mean density kept), values 1 + Geometric(1/2), columns
/// shuffled. Same seed, same matrix.
SparseTriplets gen_synthetic(std::size_t rows, std::size_t cols, double density, double zipf, std::uint64_t seed);

/// singular_values.txt, u_slice.csv, v_slice.csv, iterations.tsv,
/// partition.tsv (block runs only), provenance.txt.
void write_outputs(const DecomposeResult& r, const RunConfig& cfg, const std::filesystem::path& dir);

void write_iterations_tsv(std::ostream& out, const std::vector<IterationRecord>& log);

}  // namespace bsvd
