#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsvd/dense.hpp"
#include "bsvd/sparse.hpp"

namespace bsvd {

/// H = I − 2 r̂ r̂ᵗ acting on indices [offset, offset + unit_vector.size()).
struct HouseholderReflector {
  std::vector<double> unit_vector;
  std::size_t offset = 0;

  void apply(std::span<double> x) const;
  /// A ← H·A (H acts on rows).
  void apply_left(DenseMatrix& a, std::size_t col_begin = 0) const;
  /// A ← A·H (H acts on columns).
  void apply_right(DenseMatrix& a, std::size_t row_begin = 0) const;
  /// n × n dense form; test use only.
  DenseMatrix to_dense(std::size_t n) const;
};

/// Reflector mapping column[offset:] onto (σN, 0, …, 0), N its norm and
/// σ = −sign(column[offset]) (with sign(0) = +1). Throws ZeroColumnError when
/// the sub-vector is zero.
HouseholderReflector householder_annihilating(std::span<const double> column, std::size_t offset);

/// left_factorᵗ · A · right_factor = bidiag, bidiag upper bidiagonal n × n,
/// left_factor m × n with orthonormal columns.
struct BidiagonalResult {
  DenseMatrix left_factor;
  DenseMatrix bidiag;
  DenseMatrix right_factor;
  std::size_t reflections = 0;
};

/// Requires rows ≥ cols; throws DimensionError otherwise.
BidiagonalResult bidiagonalize(const DenseMatrix& a);

struct QrOptions {
  double tol = 1e-12;
  std::size_t max_sweeps = 20000;
};

/// A = u_slice · diag(d) · v_sliceᵗ
struct EconomySVD {
  DenseMatrix u_slice;
  DiagonalMatrix d;
  DenseMatrix v_slice;

  std::size_t rank() const { return d.size(); }
};

/// One zero-shift sweep on the upper bidiagonal (diag, super): right 2×2
/// reflections take it to lower bidiagonal form, left reflections bring it
/// back. `left`/`right`, when given, have the reflections folded into their
/// columns.
void zero_shift_sweep(std::span<double> diag, std::span<double> super, DenseMatrix* left, DenseMatrix* right);

/// Sweeps until ‖superdiagonal‖ ≤ tol·‖B‖_F, then makes the values
/// non-negative and sorts them descending. No rank truncation. Throws
/// ConvergenceError carrying the off-diagonal mass after max_sweeps.
EconomySVD qr_diagonalize(const BidiagonalResult& b, const QrOptions& opts = {});

/// Full thin decomposition (min(m,n) values, nothing dropped).
EconomySVD svd_thin(const DenseMatrix& a, const QrOptions& opts = {});

/// Singular values only, descending, min(m,n) of them.
std::vector<double> singular_values(const DenseMatrix& a, const QrOptions& opts = {});

/// Bidiagonalization followed by QR sweeps; keeps values > tol_rank·max.
EconomySVD svd_dense(const DenseMatrix& a, double tol_rank = 1e-12, const QrOptions& opts = {});

/// Economy decomposition through the eigendecomposition of AᵗA:
/// d = √λ for λ > tol_rank·λmax, u_slice = A·V·D⁻¹. Requires rows ≥ cols.
EconomySVD economy_svd_gram(const DenseMatrix& a, double tol_rank = 1e-12);
EconomySVD economy_svd_gram(const SparseTriplets& a, double tol_rank = 1e-12);

/// a = q·r with q (m × n) orthonormal columns, r upper triangular. m ≥ n.
struct ThinQr {
  DenseMatrix q;
  DenseMatrix r;
};
ThinQr householder_qr(const DenseMatrix& a);

}  // namespace bsvd

namespace bsvd {

/// Orthonormal basis of the complement of span(u), u with orthonormal
/// columns: [u | result] is square orthogonal. Zero-width when u is square.
DenseMatrix orthonormal_complement(const DenseMatrix& u);

}  // namespace bsvd

namespace bsvd {

/// Thin SVD by one-sided Jacobi rotations on the columns. Slower than the
/// sweep method on large inputs but insensitive to clustered values, and
/// each u column is accurate relative to its own singular value. Returns
/// min(m, n) values, descending; u columns of zero values are completed to an
/// orthonormal set. Throws ConvergenceError after max_sweeps.
EconomySVD svd_jacobi(const DenseMatrix& a, double tol = 1e-15, std::size_t max_sweeps = 80);

/// svd_jacobi followed by the same rank cutoff as svd_dense.
EconomySVD svd_jacobi_truncated(const DenseMatrix& a, double tol_rank = 1e-12);

}  // namespace bsvd
