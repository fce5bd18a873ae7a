#pragma once

#include <cstddef>
#include <vector>

#include "bsvd/dense.hpp"

namespace bsvd {

/// Generalized Householder transformation on an N = n + (N−n) split:
///
///   H = [ I − U(I−α)Uᵗ      UβVᵗ        ]
///       [ VβUᵗ              I − V(I+α)Vᵗ ]
///
/// u_slice (n × m) and v_slice ((N−n) × m) have orthonormal columns and
/// α² + β² = I. H is symmetric and involutive; it flips the sign of an
/// m-dimensional subspace.
struct BlockReflector {
  DenseMatrix u_slice;
  DenseMatrix v_slice;
  DiagonalMatrix alpha;
  DiagonalMatrix beta;

  std::size_t rank() const { return alpha.size(); }
  std::size_t top_size() const { return u_slice.rows(); }
  std::size_t bottom_size() const { return v_slice.rows(); }

  /// N × N dense form. Test-only; the algorithms never call it.
  DenseMatrix materialize() const;
};

/// a = unitary · symmetric, symmetric = (aᵗa)^{1/2}.
struct PolarPair {
  DenseMatrix unitary;
  DenseMatrix symmetric;
};

/// Throws RankError when the smallest eigenvalue of aᵗa is ≤ tol_rank times
/// the largest.
PolarPair polar_factor(const DenseMatrix& a, double tol_rank = 1e-12);

/// a11 = u·c·xᵗ and a21 = v·s·xᵗ with c² + s² = I.
struct GsvdPair {
  DenseMatrix u;
  DenseMatrix v;
  DiagonalMatrix c;
  DiagonalMatrix s;
  DenseMatrix x;
};

/// Built from a thin QR of the stacked [a11; a21] followed by a CS split of
/// the orthonormal factor. Requires a11 and a21 to each have at least as many
/// rows as columns (DimensionError) and the stack to have full column rank
/// (RankError).
GsvdPair gsvd_pair(const DenseMatrix& a11, const DenseMatrix& a21, double tol_rank = 1e-12);

/// Reflector whose left action zeroes the lower block of [a11; a21]
/// (α = c, β = s from the GSVD). When a21 has fewer rows than columns, the
/// directions with s = 0 are left out of the reflector.
BlockReflector annihilating_reflector(const DenseMatrix& a11, const DenseMatrix& a21, double tol_rank = 1e-12);

/// Candidate α, β from the polar-factor route, as symmetric matrices:
/// α = (I + S₂₁ S₁₁^{p} S₂₁)^{-1/2}, β = (I − α²)^{1/2}. Both p = +2 and
/// p = −2 are evaluated; the one with the smaller residual
/// ‖βS₁₁ − αS₂₁‖_F wins.
struct PolarRouteParams {
  DenseMatrix alpha;
  DenseMatrix beta;
  double residual = 0.0;
  int exponent = -2;
};
PolarRouteParams polar_route_alpha(const DenseMatrix& s11, const DenseMatrix& s21, double tol_rank = 1e-12);

struct BlockPair {
  DenseMatrix first;
  DenseMatrix second;
};

/// H·[top; bottom] from block products only.
BlockPair apply_reflector_left(const BlockReflector& h, const DenseMatrix& top, const DenseMatrix& bottom);
/// [left, right]·H from block products only.
BlockPair apply_reflector_right(const BlockReflector& h, const DenseMatrix& left, const DenseMatrix& right);

/// In-place forms; the only extra storage is one product the size of the
/// larger operand plus rank-width scratch.
void apply_reflector_left_inplace(const BlockReflector& h, DenseMatrix& top, DenseMatrix& bottom);
void apply_reflector_right_inplace(const BlockReflector& h, DenseMatrix& left, DenseMatrix& right);

struct BlockMatrix2x2 {
  DenseMatrix a11;
  DenseMatrix a12;
  DenseMatrix a21;
  DenseMatrix a22;

  double offdiagonal_norm() const;
  double norm() const;
};

struct FullBlockSvd {
  std::vector<BlockReflector> left;   ///< applied in order on the left
  std::vector<BlockReflector> right;  ///< applied in order on the right
  BlockMatrix2x2 blocks;              ///< block-diagonalized result
  std::vector<double> offdiagonal_history;  ///< after each round, starting with the input
  std::vector<double> block11_history;      ///< ‖A₁₁‖_F, same points; never decreases
  std::size_t rounds = 0;
};

/// Alternates left annihilation of block 21 and right annihilation of block
/// 12 until ‖A₁₂‖_F + ‖A₂₁‖_F ≤ tol·‖A‖_F. Throws ConvergenceError after
/// max_rounds.
FullBlockSvd full_block_svd(BlockMatrix2x2 blocks, double tol = 1e-12, std::size_t max_rounds = 5000);

}  // namespace bsvd
