#pragma once

#include <cstddef>
#include <vector>

#include "bsvd/dense.hpp"
#include "bsvd/errors.hpp"
#include "bsvd/sparse.hpp"

namespace bsvd {

/// u1ᵗ·G12·u2 = diag(d_n). The bars are orthonormal complements and are only
/// filled by with_complements().
struct SubspaceBasis {
  DenseMatrix u1;
  DenseMatrix u1_bar;
  DenseMatrix u2;
  DenseMatrix u2_bar;
  DiagonalMatrix d_n;

  std::size_t rank() const { return d_n.size(); }
};

/// Orthonormal complement of u; throws OrthogonalityError when u does not
/// have orthonormal columns within 1e-10, DimensionError when it is wide.
DenseMatrix complement_basis(const DenseMatrix& u);

/// SVD of the coupling block, truncated at tol_rank relative to the largest
/// value. m = 0 for a zero block.
SubspaceBasis offdiag_svd(const DenseMatrix& g12, double tol_rank = 1e-12);
SubspaceBasis with_complements(SubspaceBasis b);

/// [[m11_tilde, d_n], [d_n, m22_tilde]]
struct ReducedMatrix {
  DenseMatrix m11_tilde;
  DenseMatrix m22_tilde;
  DiagonalMatrix d_n;

  DenseMatrix assemble() const;
};

/// Gram blocks of A·V and the two block-column slices of V.
struct TraceIterState {
  DenseMatrix g11;
  DenseMatrix g12;
  DenseMatrix g22;
  DenseMatrix v1;  ///< n × cut
  DenseMatrix v2;  ///< n × (n − cut)
  std::size_t iteration = 0;
  double trace11 = 0.0;
  double trace22 = 0.0;
  double nondiag = 0.0;
  double total_trace = 0.0;

  std::size_t cut() const { return g11.rows(); }
  std::size_t size() const { return g11.rows() + g22.rows(); }
  /// Recomputes trace11, trace22 and nondiag from the blocks.
  void refresh();
};

/// V = I. Needs the dense G22; throws MemoryBudgetError when only its
/// diagonal was kept.
TraceIterState make_state(GramBlocks g);

/// x for the 2×2 case [[a, b], [b, c]]: the map [[√(1−x²), σx], [σx, −√(1−x²)]]
/// (σ = sign b) diagonalizes it and puts the larger eigenvalue first; with
/// α = 1 − 2x², αb = ½√(1 − α²)(a − c). Returns 0 when a = c and b = 0.
double two_by_two_x(double a, double b, double c);
/// The 2×2 orthogonal map built from two_by_two_x.
DenseMatrix two_by_two_transform(double a, double b, double c);

/// Sum of the singular values of g12.
double nondiagonality(const DenseMatrix& g12);

/// One trace-maximizing step. Works on the 2m coupled directions only: the
/// composite map is I + W(Q − I)Wᵗ with W = diag(U₁, U₂) and Q the
/// eigenvectors of the reduced matrix.
TraceIterState trace_step(TraceIterState s, double tol_rank = 1e-12);

/// Same step through the literal n × n product S·Ũ with complement bases.
/// Test reference only.
TraceIterState trace_step_reference(const TraceIterState& s, double tol_rank = 1e-12);

/// Block rotation built from the annihilating reflector of [G11; G21/n],
/// applied as a similarity. A rank-deficient stack gives the identity step;
/// `skipped` reports it.
TraceIterState damped_annihilation_step(TraceIterState s, std::size_t n, bool* skipped = nullptr,
                                        double tol_rank = 1e-12);

/// H·G·H with H the annihilating reflector of [G11; G21].
TraceIterState initial_annihilation(TraceIterState s, double tol_rank = 1e-12);

struct IterationRecord {
  std::size_t iteration = 0;
  double trace11 = 0.0;
  double trace22 = 0.0;
  double nondiag = 0.0;
  double seconds = 0.0;
  double trace11_before_step = 0.0;  ///< after any damping, before the trace step
  bool damped = false;
};

struct IterateOptions {
  double ratio_tol = 1e-4;
  std::size_t max_iters = 500;
  double tol_rank = 1e-12;
};

struct IterateResult {
  TraceIterState state;
  std::vector<IterationRecord> log;
  double initial_ratio = 0.0;
  double final_ratio = 0.0;
};

class IterationLimitError : public ConvergenceError {
 public:
  IterationLimitError(IterateResult partial, double residual);
  const IterateResult& partial() const { return partial_; }
  IterateResult take_partial();

 private:
  IterateResult partial_;
};

bool is_perfect_square(std::size_t i);

/// Trace steps until nondiag/trace11 ≤ ratio_tol × its starting value. At
/// every perfect-square iteration i a damped annihilation with n = i runs
/// first. Throws IterationLimitError after max_iters.
IterateResult iterate(TraceIterState s, const IterateOptions& opts = {});

}  // namespace bsvd
