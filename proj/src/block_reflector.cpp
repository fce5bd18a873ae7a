#include "bsvd/block_reflector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bsvd/baseline_svd.hpp"
#include "bsvd/eigen.hpp"
#include "bsvd/errors.hpp"

namespace bsvd {
namespace {

// Below this the lower CS component is treated as exactly zero.
constexpr double kZeroSine = 1e-14;

struct CsCore {
  DenseMatrix u;       // n × m
  DenseMatrix z;       // p × m, Q₂W
  DenseMatrix x;       // m × m
  std::vector<double> c;
  std::vector<double> s;
};

DenseMatrix select_columns(const DenseMatrix& a, const std::vector<std::size_t>& cols) {
  DenseMatrix out(a.rows(), cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, k) = a(i, cols[k]);
  return out;
}

CsCore cs_core(const DenseMatrix& a11, const DenseMatrix& a21, double tol_rank) {
  const std::size_t m = a11.cols();
  if (a21.cols() != m) throw DimensionError("gsvd: blocks have different column counts");
  if (a11.rows() < m) throw DimensionError("gsvd: upper block needs at least as many rows as columns");

  const auto qr = householder_qr(vstack(a11, a21));
  const auto sv = svd_jacobi(qr.r).d.values();
  if (m > 0 && (sv.back() <= tol_rank * sv.front() || sv.front() == 0.0)) {
    throw RankError("gsvd: stacked blocks are rank deficient");
  }
  const std::size_t n = a11.rows();
  const DenseMatrix q1 = qr.q.rows_range(0, n);
  const DenseMatrix q2 = qr.q.rows_range(n, a21.rows());

  // Sines first: Jacobi on Q₂ resolves small s and their vectors, which the
  // cosines near 1 cannot. Directions with large s are split again through
  // Q₁, where the cosines are the small, well-separated values.
  const EconomySVD lower = svd_jacobi(q2);
  DenseMatrix w = lower.v_slice;
  std::vector<double> s = lower.d.values();
  if (w.cols() < m) {
    w = hstack(w, orthonormal_complement(w));
    s.resize(m, 0.0);
  }
  std::vector<std::size_t> small, large;
  for (std::size_t i = 0; i < m; ++i) (s[i] > std::sqrt(0.5) ? large : small).push_back(i);

  CsCore core;
  core.u = DenseMatrix(n, m);
  std::vector<double> c(m);
  DenseMatrix w_all(m, m);
  std::size_t col = 0;
  if (!large.empty()) {
    const DenseMatrix wl = select_columns(w, large);
    EconomySVD upper = svd_jacobi(matmul(q1, wl));
    const DenseMatrix wl_rot = matmul(wl, upper.v_slice);
    // svd_jacobi sorts descending, so these cosines come out largest first;
    // reverse them to keep c descending overall after the small-s block.
    for (std::size_t k = 0; k < large.size(); ++k) {
      const std::size_t src = large.size() - 1 - k;
      c[small.size() + k] = upper.d[src];
      for (std::size_t i = 0; i < n; ++i) core.u(i, small.size() + k) = upper.u_slice(i, src);
      for (std::size_t i = 0; i < m; ++i) w_all(i, small.size() + k) = wl_rot(i, src);
    }
  }
  // Small-s directions: s ascending means c descending.
  std::sort(small.begin(), small.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  const DenseMatrix ws = select_columns(w, small);
  const DenseMatrix us = matmul(q1, ws);
  for (std::size_t k = 0; k < small.size(); ++k, ++col) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += us(i, k) * us(i, k);
    norm = std::sqrt(norm);
    c[col] = norm;
    for (std::size_t i = 0; i < n; ++i) core.u(i, col) = us(i, k) / norm;
    for (std::size_t i = 0; i < m; ++i) w_all(i, col) = ws(i, k);
  }

  core.z = matmul(q2, w_all);
  core.c = std::move(c);
  core.s.resize(m);
  std::vector<double> r(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s2 = 0.0;
    for (std::size_t row = 0; row < core.z.rows(); ++row) s2 += core.z(row, i) * core.z(row, i);
    const double si = std::sqrt(s2);
    r[i] = std::hypot(core.c[i], si);
    core.c[i] /= r[i];
    core.s[i] = si / r[i];
  }
  // Xᵗ = diag(r)·Wᵗ·R
  core.x = scale_columns(matmul_tn(qr.r, w_all), r);
  return core;
}

// Orthonormal V with V·diag(s) ≈ Z on the columns listed in `keep`, built by
// twice-repeated modified Gram-Schmidt in order of decreasing s. Columns whose
// direction is lost come back as `false` in the returned mask.
std::vector<bool> orthonormalize(const DenseMatrix& z, const std::vector<double>& s,
                                 const std::vector<std::size_t>& keep, DenseMatrix& v) {
  std::vector<bool> ok(z.cols(), false);
  std::vector<std::size_t> order = keep;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<std::size_t> done;
  const std::size_t p = z.rows();
  for (std::size_t col : order) {
    std::vector<double> w = z.column(col);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& x : w) x /= norm;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev : done) {
        double dot = 0.0;
        for (std::size_t i = 0; i < p; ++i) dot += v(i, prev) * w[i];
        for (std::size_t i = 0; i < p; ++i) w[i] -= dot * v(i, prev);
      }
    }
    double wn = 0.0;
    for (double x : w) wn += x * x;
    wn = std::sqrt(wn);
    if (wn < 0.5) continue;
    for (std::size_t i = 0; i < p; ++i) v(i, col) = w[i] / wn;
    ok[col] = true;
    done.push_back(col);
  }
  return ok;
}


std::vector<double> select(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

}  // namespace

DenseMatrix BlockReflector::materialize() const {
  const std::size_t n = top_size();
  const std::size_t total = n + bottom_size();
  std::vector<double> one_minus(rank()), one_plus(rank());
  for (std::size_t i = 0; i < rank(); ++i) {
    one_minus[i] = 1.0 - alpha[i];
    one_plus[i] = 1.0 + alpha[i];
  }
  DenseMatrix h = DenseMatrix::identity(total);
  h.set_block(0, 0, DenseMatrix::identity(n) - matmul_nt(scale_columns(u_slice, one_minus), u_slice));
  const DenseMatrix ub_vt = matmul_nt(scale_columns(u_slice, beta.values()), v_slice);
  h.set_block(0, n, ub_vt);
  h.set_block(n, 0, transpose(ub_vt));
  h.set_block(n, n, DenseMatrix::identity(bottom_size()) - matmul_nt(scale_columns(v_slice, one_plus), v_slice));
  return h;
}

PolarPair polar_factor(const DenseMatrix& a, double tol_rank) {
  const auto eig = jacobi_eigh(matmul_tn(a, a));
  if (eig.values.empty()) return {a, DenseMatrix()};
  const double top = eig.values[0];
  const double bottom = eig.values[eig.values.size() - 1];
  if (top <= 0.0 || bottom <= tol_rank * top) throw RankError("polar_factor: input is rank deficient");
  PolarPair out;
  out.symmetric = symmetric_function(eig, [](double l) { return std::sqrt(l); });
  out.unitary = matmul(a, symmetric_function(eig, [](double l) { return 1.0 / std::sqrt(l); }));
  return out;
}

GsvdPair gsvd_pair(const DenseMatrix& a11, const DenseMatrix& a21, double tol_rank) {
  const std::size_t m = a11.cols();
  if (a21.rows() < m) throw DimensionError("gsvd_pair: lower block needs at least as many rows as columns");
  CsCore core = cs_core(a11, a21, tol_rank);

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m; ++i)
    if (core.s[i] > kZeroSine) keep.push_back(i);
  DenseMatrix v(a21.rows(), m);
  const auto ok = orthonormalize(core.z, core.s, keep, v);

  // Directions with s = 0 get any orthonormal completion.
  std::vector<std::size_t> filled, missing;
  for (std::size_t i = 0; i < m; ++i) (ok[i] ? filled : missing).push_back(i);
  if (!missing.empty()) {
    const DenseMatrix comp = orthonormal_complement(select_columns(v, filled));
    for (std::size_t k = 0; k < missing.size(); ++k) {
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, missing[k]) = comp(i, k);
      // The completion carries no lower-block content.
      if (core.s[missing[k]] <= kZeroSine) {
        core.s[missing[k]] = 0.0;
        core.c[missing[k]] = 1.0;
      }
    }
  }
  return {std::move(core.u), std::move(v), DiagonalMatrix(std::move(core.c)), DiagonalMatrix(std::move(core.s)),
          std::move(core.x)};
}

BlockReflector annihilating_reflector(const DenseMatrix& a11, const DenseMatrix& a21, double tol_rank) {
  const std::size_t m = a11.cols();
  if (a21.rows() >= m) {
    GsvdPair g = gsvd_pair(a11, a21, tol_rank);
    return {std::move(g.u), std::move(g.v), std::move(g.c), std::move(g.s)};
  }
  // Not enough lower rows for a full V: keep only the directions that carry
  // lower-block content, which is all the annihilation needs.
  CsCore core = cs_core(a11, a21, tol_rank);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < m; ++i)
    if (core.s[i] > kZeroSine) keep.push_back(i);
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return core.s[a] > core.s[b]; });
  if (keep.size() > a21.rows()) keep.resize(a21.rows());
  std::sort(keep.begin(), keep.end());
  DenseMatrix v(a21.rows(), m);
  const auto ok = orthonormalize(core.z, core.s, keep, v);
  std::vector<std::size_t> used;
  for (std::size_t i : keep)
    if (ok[i]) used.push_back(i);
  return {select_columns(core.u, used), select_columns(v, used), DiagonalMatrix(select(core.c, used)),
          DiagonalMatrix(select(core.s, used))};
}

PolarRouteParams polar_route_alpha(const DenseMatrix& s11, const DenseMatrix& s21, double tol_rank) {
  const auto e11 = jacobi_eigh(s11);
  double top = 0.0, bottom = std::numeric_limits<double>::infinity();
  for (double l : e11.values.values()) {
    top = std::max(top, std::abs(l));
    bottom = std::min(bottom, std::abs(l));
  }
  if (e11.values.empty() || bottom <= tol_rank * top) throw RankError("polar_route_alpha: S11 is singular");

  const std::size_t m = s11.rows();
  PolarRouteParams best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int exponent : {2, -2}) {
    const DenseMatrix s11_pow =
        symmetric_function(e11, [exponent](double l) { return std::pow(l, static_cast<double>(exponent)); });
    DenseMatrix inner = DenseMatrix::identity(m) + matmul(matmul(s21, s11_pow), s21);
    symmetrize(inner);
    const auto ei = jacobi_eigh(inner);
    const DenseMatrix alpha = symmetric_function(ei, [](double l) { return 1.0 / std::sqrt(l); });
    const auto ea2 = jacobi_eigh([&] {
      DenseMatrix a2 = matmul(alpha, alpha);
      symmetrize(a2);
      return a2;
    }());
    const DenseMatrix beta = symmetric_function(ea2, [](double l) { return std::sqrt(std::max(0.0, 1.0 - l)); });
    const double residual = frobenius_norm(matmul(beta, s11) - matmul(alpha, s21));
    if (residual < best.residual || (residual == best.residual && exponent == -2)) {
      best = {alpha, beta, residual, exponent};
    }
  }
  return best;
}

void apply_reflector_left_inplace(const BlockReflector& h, DenseMatrix& top, DenseMatrix& bottom) {
  if (top.rows() != h.top_size() || bottom.rows() != h.bottom_size() || top.cols() != bottom.cols()) {
    throw DimensionError("apply_reflector_left: block shapes do not match the reflector");
  }
  const std::size_t m = h.rank();
  if (m == 0) return;
  const DenseMatrix ut = matmul_tn(h.u_slice, top);
  const DenseMatrix vb = matmul_tn(h.v_slice, bottom);
  std::vector<double> am1(m), neg_ap1(m);
  for (std::size_t i = 0; i < m; ++i) {
    am1[i] = h.alpha[i] - 1.0;
    neg_ap1[i] = -(1.0 + h.alpha[i]);
  }
  const DenseMatrix upper = scale_rows(am1, ut) + scale_rows(h.beta.values(), vb);
  const DenseMatrix lower = scale_rows(h.beta.values(), ut) + scale_rows(neg_ap1, vb);
  top += matmul(h.u_slice, upper);
  bottom += matmul(h.v_slice, lower);
}

void apply_reflector_right_inplace(const BlockReflector& h, DenseMatrix& left, DenseMatrix& right) {
  if (left.cols() != h.top_size() || right.cols() != h.bottom_size() || left.rows() != right.rows()) {
    throw DimensionError("apply_reflector_right: block shapes do not match the reflector");
  }
  const std::size_t m = h.rank();
  if (m == 0) return;
  const DenseMatrix lu = matmul(left, h.u_slice);
  const DenseMatrix rv = matmul(right, h.v_slice);
  std::vector<double> am1(m), neg_ap1(m);
  for (std::size_t i = 0; i < m; ++i) {
    am1[i] = h.alpha[i] - 1.0;
    neg_ap1[i] = -(1.0 + h.alpha[i]);
  }
  const DenseMatrix first = scale_columns(lu, am1) + scale_columns(rv, h.beta.values());
  const DenseMatrix second = scale_columns(lu, h.beta.values()) + scale_columns(rv, neg_ap1);
  left += matmul_nt(first, h.u_slice);
  right += matmul_nt(second, h.v_slice);
}

BlockPair apply_reflector_left(const BlockReflector& h, const DenseMatrix& top, const DenseMatrix& bottom) {
  BlockPair out{top, bottom};
  apply_reflector_left_inplace(h, out.first, out.second);
  return out;
}

BlockPair apply_reflector_right(const BlockReflector& h, const DenseMatrix& left, const DenseMatrix& right) {
  BlockPair out{left, right};
  apply_reflector_right_inplace(h, out.first, out.second);
  return out;
}

double BlockMatrix2x2::offdiagonal_norm() const { return frobenius_norm(a12) + frobenius_norm(a21); }

double BlockMatrix2x2::norm() const {
  return std::sqrt(frobenius_sq(a11) + frobenius_sq(a12) + frobenius_sq(a21) + frobenius_sq(a22));
}

FullBlockSvd full_block_svd(BlockMatrix2x2 b, double tol, std::size_t max_rounds) {
  if (b.a11.rows() != b.a12.rows() || b.a21.rows() != b.a22.rows() || b.a11.cols() != b.a21.cols() ||
      b.a12.cols() != b.a22.cols()) {
    throw DimensionError("full_block_svd: inconsistent block shapes");
  }
  FullBlockSvd out;
  const double norm = b.norm();
  out.offdiagonal_history.push_back(b.offdiagonal_norm());
  out.block11_history.push_back(frobenius_norm(b.a11));
  while (b.offdiagonal_norm() > tol * norm) {
    if (out.rounds == max_rounds) {
      throw ConvergenceError("full_block_svd: round limit reached", b.offdiagonal_norm());
    }
    if (frobenius_norm(b.a21) > 0.0) {
      BlockReflector h = annihilating_reflector(b.a11, b.a21);
      apply_reflector_left_inplace(h, b.a11, b.a21);
      apply_reflector_left_inplace(h, b.a12, b.a22);
      out.left.push_back(std::move(h));
    }
    if (frobenius_norm(b.a12) > 0.0) {
      BlockReflector h = annihilating_reflector(transpose(b.a11), transpose(b.a12));
      apply_reflector_right_inplace(h, b.a11, b.a12);
      apply_reflector_right_inplace(h, b.a21, b.a22);
      out.right.push_back(std::move(h));
    }
    ++out.rounds;
    out.offdiagonal_history.push_back(b.offdiagonal_norm());
    out.block11_history.push_back(frobenius_norm(b.a11));
  }
  out.blocks = std::move(b);
  return out;
}

}  // namespace bsvd
