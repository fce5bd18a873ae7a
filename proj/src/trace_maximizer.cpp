#include "bsvd/trace_maximizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bsvd/baseline_svd.hpp"
#include "bsvd/block_reflector.hpp"
#include "bsvd/eigen.hpp"

namespace bsvd {
namespace {

DenseMatrix block_of(const DenseMatrix& a, std::size_t r0, std::size_t rows, std::size_t c0, std::size_t cols) {
  return a.block(r0, c0, rows, cols);
}

// m ← (I − 2VVᵗ)·m
void flip_left(const DenseMatrix& v, DenseMatrix& m) { m -= 2.0 * matmul(v, matmul_tn(v, m)); }

// m ← m·(I − 2VVᵗ)
void flip_right(DenseMatrix& m, const DenseMatrix& v) { m -= 2.0 * matmul_nt(matmul(m, v), v); }

// H·G·H on the Gram blocks and V ← V·H.
void reflect(TraceIterState& s, const BlockReflector& h) {
  DenseMatrix g21 = transpose(s.g12);
  apply_reflector_left_inplace(h, s.g11, g21);
  apply_reflector_left_inplace(h, s.g12, s.g22);
  apply_reflector_right_inplace(h, s.g11, s.g12);
  apply_reflector_right_inplace(h, g21, s.g22);
  s.g12 += transpose(g21);
  s.g12 *= 0.5;
  symmetrize(s.g11);
  symmetrize(s.g22);
  apply_reflector_right_inplace(h, s.v1, s.v2);
}

}  // namespace

void TraceIterState::refresh() {
  trace11 = trace(g11);
  trace22 = trace(g22);
  nondiag = nondiagonality(g12);
}

TraceIterState make_state(GramBlocks g) {
  if (g.g22_diagonal_only) throw MemoryBudgetError("G22", g.g22_diagonal.size() * g.g22_diagonal.size() * sizeof(double), memory::active_limit());
  TraceIterState s;
  s.g11 = std::move(g.g11);
  s.g12 = std::move(g.g12);
  s.g22 = std::move(g.g22);
  const std::size_t k = s.g11.rows();
  const std::size_t n = k + s.g22.rows();
  s.v1 = DenseMatrix(n, k);
  s.v2 = DenseMatrix(n, n - k);
  for (std::size_t i = 0; i < k; ++i) s.v1(i, i) = 1.0;
  for (std::size_t i = 0; i < n - k; ++i) s.v2(k + i, i) = 1.0;
  s.refresh();
  s.total_trace = s.trace11 + s.trace22;
  return s;
}

DenseMatrix complement_basis(const DenseMatrix& u) {
  if (u.cols() > u.rows()) throw DimensionError("complement_basis: more columns than rows");
  if (u.cols() > 0 && orthogonality_defect(u) > 1e-10) {
    throw OrthogonalityError("complement_basis: columns are not orthonormal");
  }
  return orthonormal_complement(u);
}

SubspaceBasis offdiag_svd(const DenseMatrix& g12, double tol_rank) {
  SubspaceBasis b;
  if (g12.empty() || max_abs(g12) == 0.0) {
    b.u1 = DenseMatrix(g12.rows(), 0);
    b.u2 = DenseMatrix(g12.cols(), 0);
    return b;
  }
  EconomySVD s = svd_jacobi_truncated(g12, tol_rank);
  b.u1 = std::move(s.u_slice);
  b.u2 = std::move(s.v_slice);
  b.d_n = std::move(s.d);
  return b;
}

SubspaceBasis with_complements(SubspaceBasis b) {
  b.u1_bar = complement_basis(b.u1);
  b.u2_bar = complement_basis(b.u2);
  return b;
}

DenseMatrix ReducedMatrix::assemble() const {
  const std::size_t m = d_n.size();
  DenseMatrix k(2 * m, 2 * m);
  k.set_block(0, 0, m11_tilde);
  k.set_block(m, m, m22_tilde);
  for (std::size_t i = 0; i < m; ++i) {
    k(i, m + i) = d_n[i];
    k(m + i, i) = d_n[i];
  }
  return k;
}

double two_by_two_x(double a, double b, double c) {
  const double diff = a - c;
  const double r = std::hypot(diff, 2.0 * b);
  if (r == 0.0) return 0.0;
  // r − diff without cancellation when diff > 0.
  const double gap = diff > 0.0 ? 4.0 * b * b / (r + diff) : r - diff;
  return std::sqrt(std::clamp(gap / (2.0 * r), 0.0, 1.0));
}

DenseMatrix two_by_two_transform(double a, double b, double c) {
  const double x = two_by_two_x(a, b, c);
  const double cx = std::sqrt(1.0 - x * x);
  const double sx = b < 0.0 ? -x : x;
  return DenseMatrix::from_rows({{cx, sx}, {sx, -cx}});
}

double nondiagonality(const DenseMatrix& g12) {
  if (g12.empty()) return 0.0;
  double sum = 0.0;
  const EconomySVD s = svd_jacobi(g12);
  for (double v : s.d.values()) sum += v;
  return sum;
}

TraceIterState trace_step(TraceIterState s, double tol_rank) {
  ++s.iteration;
  const SubspaceBasis b = offdiag_svd(s.g12, tol_rank);
  const std::size_t m = b.rank();
  if (m == 0) return s;
  const std::size_t k = s.cut();
  const std::size_t n2 = s.g22.rows();

  // Temporaries are scoped so that at most a few N×2m pieces are alive.
  DenseMatrix e, f;
  DenseMatrix p11 = matmul(s.g11, b.u1);
  DenseMatrix p22 = matmul(s.g22, b.u2);
  {
    ReducedMatrix red{matmul_tn(b.u1, p11), matmul_tn(b.u2, p22), b.d_n};
    symmetrize(red.m11_tilde);
    symmetrize(red.m22_tilde);
    const DenseMatrix kmat = red.assemble();
    red = {};
    e = std::move(jacobi_eigh(kmat).vectors);
    e -= DenseMatrix::identity(2 * m);
    f = matmul_tn(e, matmul(kmat, e));
  }
  symmetrize(f);
  f *= 0.5;

  // Z = P·E + ½·W·F, one block row at a time.
  const DenseMatrix e_top = e.rows_range(0, m);
  const DenseMatrix e_bot = e.rows_range(m, m);
  DenseMatrix z_top = matmul(p11, e_top);
  p11 = {};
  z_top += matmul(matmul(s.g12, b.u2), e_bot);
  z_top += matmul(b.u1, f.rows_range(0, m));
  DenseMatrix z_bot = matmul(p22, e_bot);
  p22 = {};
  z_bot += matmul(matmul_tn(s.g12, b.u1), e_top);
  z_bot += matmul(b.u2, f.rows_range(m, m));

  {
    const DenseMatrix z11 = block_of(z_top, 0, k, 0, m);
    s.g11 += matmul_nt(z11, b.u1);
    s.g11 += matmul_nt(b.u1, z11);
  }
  s.g12 += matmul_nt(block_of(z_top, 0, k, m, m), b.u2);
  z_top = {};
  s.g12 += matmul_nt(b.u1, block_of(z_bot, 0, n2, 0, m));
  {
    const DenseMatrix z22 = block_of(z_bot, 0, n2, m, m);
    z_bot = {};
    s.g22 += matmul_nt(z22, b.u2);
    s.g22 += matmul_nt(b.u2, z22);
  }
  symmetrize(s.g11);
  symmetrize(s.g22);

  // V ← V + (V·W·E)·Wᵗ
  DenseMatrix y;
  {
    const DenseMatrix vw = hstack(matmul(s.v1, b.u1), matmul(s.v2, b.u2));
    y = matmul(vw, e);
  }
  s.v1 += matmul_nt(y.columns(0, m), b.u1);
  s.v2 += matmul_nt(y.columns(m, m), b.u2);

  s.refresh();
  return s;
}

TraceIterState trace_step_reference(const TraceIterState& s, double tol_rank) {
  TraceIterState out = s;
  ++out.iteration;
  const SubspaceBasis b = with_complements(offdiag_svd(s.g12, tol_rank));
  const std::size_t m = b.rank();
  if (m == 0) return out;
  const std::size_t k = s.cut();
  const std::size_t n = s.size();

  ReducedMatrix red{matmul_tn(b.u1, matmul(s.g11, b.u1)), matmul_tn(b.u2, matmul(s.g22, b.u2)), b.d_n};
  symmetrize(red.m11_tilde);
  symmetrize(red.m22_tilde);
  const SymmetricEigen eig = jacobi_eigh(red.assemble());

  // S = diag([U₁ | Ū₁], [U₂ | Ū₂])
  DenseMatrix big_s(n, n);
  big_s.set_block(0, 0, hstack(b.u1, b.u1_bar));
  big_s.set_block(k, k, hstack(b.u2, b.u2_bar));
  // Ũ mixes the U₁ and U₂ coordinates by the reduced eigenvectors.
  DenseMatrix mix = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      mix(i, j) = eig.vectors(i, j);
      mix(i, k + j) = eig.vectors(i, m + j);
      mix(k + i, j) = eig.vectors(m + i, j);
      mix(k + i, k + j) = eig.vectors(m + i, m + j);
    }
  }
  const DenseMatrix total = matmul(big_s, mix);

  DenseMatrix g(n, n);
  g.set_block(0, 0, s.g11);
  g.set_block(0, k, s.g12);
  g.set_block(k, 0, transpose(s.g12));
  g.set_block(k, k, s.g22);
  DenseMatrix gn = matmul_tn(total, matmul(g, total));
  symmetrize(gn);
  out.g11 = gn.block(0, 0, k, k);
  out.g12 = gn.block(0, k, k, n - k);
  out.g22 = gn.block(k, k, n - k, n - k);
  const DenseMatrix v = matmul(hstack(s.v1, s.v2), total);
  out.v1 = v.columns(0, k);
  out.v2 = v.columns(k, n - k);
  out.refresh();
  return out;
}

TraceIterState damped_annihilation_step(TraceIterState s, std::size_t n, bool* skipped, double tol_rank) {
  if (n == 0) throw UsageError("damped_annihilation_step: n must be at least 1");
  if (skipped) *skipped = false;
  if (s.g12.empty() || max_abs(s.g12) == 0.0) return s;
  DenseMatrix g21 = transpose(s.g12);
  g21 *= 1.0 / static_cast<double>(n);
  BlockReflector h;
  try {
    h = annihilating_reflector(s.g11, g21, tol_rank);
  } catch (const RankError&) {
    if (skipped) *skipped = true;
    return s;
  }
  reflect(s, h);
  // Follow H by diag(I, I − 2VVᵗ): together a block rotation, which goes to
  // the identity as the damping grows.
  flip_right(s.g12, h.v_slice);
  flip_left(h.v_slice, s.g22);
  flip_right(s.g22, h.v_slice);
  symmetrize(s.g22);
  flip_right(s.v2, h.v_slice);
  s.refresh();
  return s;
}

TraceIterState initial_annihilation(TraceIterState s, double tol_rank) {
  if (s.g12.empty() || max_abs(s.g12) == 0.0) return s;
  reflect(s, annihilating_reflector(s.g11, transpose(s.g12), tol_rank));
  s.refresh();
  return s;
}

IterateResult IterationLimitError::take_partial() { return std::move(partial_); }

IterationLimitError::IterationLimitError(IterateResult partial, double residual)
    : ConvergenceError("iterate: iteration limit reached", residual), partial_(std::move(partial)) {}

bool is_perfect_square(std::size_t i) {
  const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(i))));
  return r * r == i;
}

IterateResult iterate(TraceIterState s, const IterateOptions& opts) {
  if (!(opts.ratio_tol > 0.0 && opts.ratio_tol < 1.0)) throw UsageError("iterate: ratio_tol must lie in (0, 1)");
  using clock = std::chrono::steady_clock;
  IterateResult res;
  const auto ratio = [](const TraceIterState& st) { return st.trace11 > 0.0 ? st.nondiag / st.trace11 : 0.0; };
  res.initial_ratio = ratio(s);
  res.log.push_back({s.iteration, s.trace11, s.trace22, s.nondiag, 0.0, s.trace11, false});
  const double target = opts.ratio_tol * res.initial_ratio;

  while (ratio(s) > target) {
    if (s.iteration >= opts.max_iters) {
      res.final_ratio = ratio(s);
      res.state = std::move(s);
      const double r = res.final_ratio;
      throw IterationLimitError(std::move(res), r);
    }
    const auto t0 = clock::now();
    const std::size_t i = s.iteration + 1;
    IterationRecord rec;
    if (is_perfect_square(i)) {
      bool skipped = false;
      s = damped_annihilation_step(std::move(s), i, &skipped, opts.tol_rank);
      rec.damped = !skipped;
    }
    rec.trace11_before_step = s.trace11;
    s = trace_step(std::move(s), opts.tol_rank);
    rec.iteration = s.iteration;
    rec.trace11 = s.trace11;
    rec.trace22 = s.trace22;
    rec.nondiag = s.nondiag;
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.log.push_back(rec);
  }
  res.final_ratio = ratio(s);
  res.state = std::move(s);
  return res;
}

}  // namespace bsvd
