#include "bsvd/baseline_svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsvd/eigen.hpp"
#include "bsvd/errors.hpp"

namespace bsvd {
namespace {

double scaled_norm(std::span<const double> x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

// 2×2 reflector taking (x, y) to (−sign(x)·hypot(x, y), 0). Returns false when
// y is already zero and nothing needs to be done.
struct Reflector2 {
  double r0 = 0.0;
  double r1 = 0.0;

  bool build(double x, double y) {
    if (y == 0.0) return false;
    const double n = std::hypot(x, y);
    const double v0 = x + (x >= 0.0 ? n : -n);
    const double vn = std::hypot(v0, y);
    r0 = v0 / vn;
    r1 = y / vn;
    return true;
  }
  void apply(double& p, double& q) const {
    const double t = r0 * p + r1 * q;
    p -= 2.0 * r0 * t;
    q -= 2.0 * r1 * t;
  }
  void apply_columns(DenseMatrix& m, std::size_t i) const {
    for (std::size_t row = 0; row < m.rows(); ++row) {
      auto r = m.row(row);
      apply(r[i], r[i + 1]);
    }
  }
};

BidiagonalResult bidiagonalize_impl(const DenseMatrix& a, bool want_factors) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionError("bidiagonalize: needs rows >= cols");

  DenseMatrix work = a;
  std::vector<HouseholderReflector> left;
  std::vector<HouseholderReflector> right;
  std::vector<double> buf;

  for (std::size_t j = 0; j < n; ++j) {
    // Left reflection: zero column j below the diagonal.
    if (m - j >= 2) {
      buf = work.column(j);
      bool tail_zero = true;
      for (std::size_t i = j + 1; i < m; ++i) tail_zero = tail_zero && buf[i] == 0.0;
      if (!tail_zero) {
        auto h = householder_annihilating(buf, j);
        h.apply_left(work, j);
        for (std::size_t i = j + 1; i < m; ++i) work(i, j) = 0.0;
        left.push_back(std::move(h));
      }
    }
    // Right reflection: zero row j beyond the superdiagonal.
    if (n - j >= 3) {
      auto row = work.row(j);
      bool tail_zero = true;
      for (std::size_t k = j + 2; k < n; ++k) tail_zero = tail_zero && row[k] == 0.0;
      if (!tail_zero) {
        auto h = householder_annihilating(std::vector<double>(row.begin(), row.end()), j + 1);
        h.apply_right(work, j);
        for (std::size_t k = j + 2; k < n; ++k) work(j, k) = 0.0;
        right.push_back(std::move(h));
      }
    }
  }

  BidiagonalResult out;
  out.reflections = left.size() + right.size();
  out.bidiag = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.bidiag(j, j) = work(j, j);
    if (j + 1 < n) out.bidiag(j, j + 1) = work(j, j + 1);
  }
  if (want_factors) {
    // Q = H₁H₂…H_k applied to [I; 0], accumulated back to front.
    out.left_factor = DenseMatrix(m, n);
    for (std::size_t j = 0; j < n; ++j) out.left_factor(j, j) = 1.0;
    for (auto it = left.rbegin(); it != left.rend(); ++it) it->apply_left(out.left_factor);
    out.right_factor = DenseMatrix::identity(n);
    for (auto it = right.rbegin(); it != right.rend(); ++it) it->apply_left(out.right_factor);
  }
  return out;
}

EconomySVD diagonalize_impl(const BidiagonalResult& b, const QrOptions& opts, bool want_vectors) {
  const std::size_t n = b.bidiag.rows();
  std::vector<double> d(n), e(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = b.bidiag(i, i);
    if (i + 1 < n) e[i] = b.bidiag(i, i + 1);
  }
  DenseMatrix left = want_vectors ? b.left_factor : DenseMatrix();
  DenseMatrix right = want_vectors ? b.right_factor : DenseMatrix();

  const double norm = frobenius_norm(b.bidiag);
  auto off_mass = [&] { return scaled_norm(e); };
  std::size_t sweeps = 0;
  while (off_mass() > opts.tol * norm) {
    if (sweeps == opts.max_sweeps) {
      throw ConvergenceError("qr_diagonalize: sweep limit reached", off_mass());
    }
    // Entries far below both neighbours will never matter; flushing them lets
    // converged pairs decouple exactly.
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (std::abs(e[i]) <= 1e-17 * (std::abs(d[i]) + std::abs(d[i + 1]))) e[i] = 0.0;
    }
    zero_shift_sweep(d, e, want_vectors ? &left : nullptr, want_vectors ? &right : nullptr);
    ++sweeps;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::abs(d[x]) > std::abs(d[y]); });

  EconomySVD out;
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = std::abs(d[order[k]]);
  out.d = DiagonalMatrix(std::move(values));
  if (want_vectors) {
    out.u_slice = DenseMatrix(left.rows(), n);
    out.v_slice = DenseMatrix(right.rows(), n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t src = order[k];
      const double sign = d[src] < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < left.rows(); ++i) out.u_slice(i, k) = sign * left(i, src);
      for (std::size_t i = 0; i < right.rows(); ++i) out.v_slice(i, k) = right(i, src);
    }
  }
  return out;
}

EconomySVD truncate(EconomySVD full, double tol_rank) {
  const double top = full.d.empty() ? 0.0 : full.d[0];
  std::size_t rank = 0;
  while (rank < full.d.size() && full.d[rank] > tol_rank * top && full.d[rank] > 0.0) ++rank;
  if (rank == full.d.size()) return full;
  EconomySVD out;
  out.u_slice = full.u_slice.columns(0, rank);
  out.v_slice = full.v_slice.columns(0, rank);
  out.d = DiagonalMatrix(std::vector<double>(full.d.values().begin(), full.d.values().begin() + rank));
  return out;
}

EconomySVD gram_route(const DenseMatrix& gram, double tol_rank,
                      const std::function<DenseMatrix(const DenseMatrix&)>& times_a) {
  const auto eig = jacobi_eigh(gram);
  const double top = eig.values.empty() ? 0.0 : eig.values[0];
  std::size_t rank = 0;
  while (rank < eig.values.size() && eig.values[rank] > tol_rank * top && eig.values[rank] > 0.0) ++rank;

  EconomySVD out;
  std::vector<double> d(rank), inv(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    d[k] = std::sqrt(eig.values[k]);
    inv[k] = 1.0 / d[k];
  }
  out.v_slice = eig.vectors.columns(0, rank);
  out.u_slice = scale_columns(times_a(out.v_slice), inv);
  out.d = DiagonalMatrix(std::move(d));
  return out;
}

}  // namespace

void HouseholderReflector::apply(std::span<double> x) const {
  double t = 0.0;
  for (std::size_t i = 0; i < unit_vector.size(); ++i) t += unit_vector[i] * x[offset + i];
  for (std::size_t i = 0; i < unit_vector.size(); ++i) x[offset + i] -= 2.0 * t * unit_vector[i];
}

void HouseholderReflector::apply_left(DenseMatrix& a, std::size_t col_begin) const {
  const std::size_t cols = a.cols();
  std::vector<double> w(cols - col_begin, 0.0);
  for (std::size_t i = 0; i < unit_vector.size(); ++i) {
    const double r = unit_vector[i];
    if (r == 0.0) continue;
    auto row = a.row(offset + i);
    for (std::size_t j = col_begin; j < cols; ++j) w[j - col_begin] += r * row[j];
  }
  for (std::size_t i = 0; i < unit_vector.size(); ++i) {
    const double r2 = 2.0 * unit_vector[i];
    if (r2 == 0.0) continue;
    auto row = a.row(offset + i);
    for (std::size_t j = col_begin; j < cols; ++j) row[j] -= r2 * w[j - col_begin];
  }
}

void HouseholderReflector::apply_right(DenseMatrix& a, std::size_t row_begin) const {
  for (std::size_t i = row_begin; i < a.rows(); ++i) apply(a.row(i));
}

DenseMatrix HouseholderReflector::to_dense(std::size_t n) const {
  DenseMatrix h = DenseMatrix::identity(n);
  for (std::size_t i = 0; i < unit_vector.size(); ++i)
    for (std::size_t j = 0; j < unit_vector.size(); ++j)
      h(offset + i, offset + j) -= 2.0 * unit_vector[i] * unit_vector[j];
  return h;
}

HouseholderReflector householder_annihilating(std::span<const double> column, std::size_t offset) {
  if (offset >= column.size()) throw DimensionError("householder_annihilating: offset past end");
  const auto x = column.subspan(offset);
  const double norm = scaled_norm(x);
  if (norm == 0.0) throw ZeroColumnError("householder_annihilating: zero sub-vector");

  std::vector<double> v(x.begin(), x.end());
  v[0] += v[0] >= 0.0 ? norm : -norm;
  const double vn = scaled_norm(v);
  for (double& c : v) c /= vn;
  return {std::move(v), offset};
}

BidiagonalResult bidiagonalize(const DenseMatrix& a) { return bidiagonalize_impl(a, true); }

void zero_shift_sweep(std::span<double> d, std::span<double> e, DenseMatrix* left, DenseMatrix* right) {
  const std::size_t n = d.size();
  if (n < 2) return;
  std::vector<double> f(n - 1, 0.0);
  Reflector2 h;
  // Right reflections: upper → lower bidiagonal.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!h.build(d[i], e[i])) continue;
    h.apply(d[i], e[i]);
    e[i] = 0.0;
    double sub = 0.0;
    h.apply(sub, d[i + 1]);
    f[i] = sub;
    if (right) h.apply_columns(*right, i);
  }
  // Left reflections: lower → upper bidiagonal.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!h.build(d[i], f[i])) continue;
    h.apply(d[i], f[i]);
    f[i] = 0.0;
    double sup = 0.0;
    h.apply(sup, d[i + 1]);
    e[i] = sup;
    if (left) h.apply_columns(*left, i);
  }
}

EconomySVD qr_diagonalize(const BidiagonalResult& b, const QrOptions& opts) { return diagonalize_impl(b, opts, true); }

EconomySVD svd_thin(const DenseMatrix& a, const QrOptions& opts) {
  if (a.rows() >= a.cols()) return diagonalize_impl(bidiagonalize_impl(a, true), opts, true);
  EconomySVD t = diagonalize_impl(bidiagonalize_impl(transpose(a), true), opts, true);
  std::swap(t.u_slice, t.v_slice);
  return t;
}

std::vector<double> singular_values(const DenseMatrix& a, const QrOptions& opts) {
  const BidiagonalResult b = a.rows() >= a.cols() ? bidiagonalize_impl(a, false) : bidiagonalize_impl(transpose(a), false);
  return diagonalize_impl(b, opts, false).d.values();
}

EconomySVD svd_dense(const DenseMatrix& a, double tol_rank, const QrOptions& opts) {
  if (a.rows() == 0 || a.cols() == 0) return {DenseMatrix(a.rows(), 0), {}, DenseMatrix(a.cols(), 0)};
  return truncate(svd_thin(a, opts), tol_rank);
}

EconomySVD economy_svd_gram(const DenseMatrix& a, double tol_rank) {
  if (a.rows() < a.cols()) throw DimensionError("economy_svd_gram: needs rows >= cols");
  return gram_route(matmul_tn(a, a), tol_rank, [&](const DenseMatrix& v) { return matmul(a, v); });
}

EconomySVD economy_svd_gram(const SparseTriplets& a, double tol_rank) {
  if (a.rows() < a.cols()) throw DimensionError("economy_svd_gram: needs rows >= cols");
  return gram_route(multiply_tn(a, a), tol_rank, [&](const DenseMatrix& v) { return multiply(a, v); });
}

ThinQr householder_qr(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionError("householder_qr: needs rows >= cols");
  DenseMatrix work = a;
  std::vector<HouseholderReflector> hs;
  for (std::size_t j = 0; j < n && j + 1 < m; ++j) {
    const auto col = work.column(j);
    bool tail_zero = true;
    for (std::size_t i = j + 1; i < m; ++i) tail_zero = tail_zero && col[i] == 0.0;
    if (tail_zero) continue;
    auto h = householder_annihilating(col, j);
    h.apply_left(work, j);
    for (std::size_t i = j + 1; i < m; ++i) work(i, j) = 0.0;
    hs.push_back(std::move(h));
  }
  ThinQr out;
  out.r = work.block(0, 0, n, n);
  out.q = DenseMatrix(m, n);
  for (std::size_t j = 0; j < n; ++j) out.q(j, j) = 1.0;
  for (auto it = hs.rbegin(); it != hs.rend(); ++it) it->apply_left(out.q);
  return out;
}

}  // namespace bsvd

namespace bsvd {

DenseMatrix orthonormal_complement(const DenseMatrix& u) {
  const std::size_t n = u.rows();
  const std::size_t k = u.cols();
  if (k > n) throw DimensionError("orthonormal_complement: more columns than rows");
  DenseMatrix work = u;
  std::vector<HouseholderReflector> hs;
  for (std::size_t j = 0; j < k && j + 1 < n; ++j) {
    const auto col = work.column(j);
    bool tail_zero = true;
    for (std::size_t i = j + 1; i < n; ++i) tail_zero = tail_zero && col[i] == 0.0;
    if (tail_zero) continue;
    auto h = householder_annihilating(col, j);
    h.apply_left(work, j);
    hs.push_back(std::move(h));
  }
  // Trailing columns of Q = H₁…H_k.
  DenseMatrix out(n, n - k);
  for (std::size_t j = 0; j < n - k; ++j) out(k + j, j) = 1.0;
  for (auto it = hs.rbegin(); it != hs.rend(); ++it) it->apply_left(out);
  return out;
}

}  // namespace bsvd

namespace bsvd {
namespace {

// Columns of the working matrix are the rows of `t` (contiguous).
EconomySVD one_sided_jacobi(DenseMatrix t, double tol, std::size_t max_sweeps) {
  const std::size_t n = t.rows();
  const std::size_t m = t.cols();
  DenseMatrix vt = DenseMatrix::identity(n);
  const auto dot = [](std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  const auto rotate = [](std::span<double> x, std::span<double> y, double c, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      const double yi = y[i];
      x[i] = c * xi - s * yi;
      y[i] = s * xi + c * yi;
    }
  };
  std::size_t sweep = 0;
  for (bool rotated = true; rotated; ++sweep) {
    if (sweep == max_sweeps) throw ConvergenceError("svd_jacobi: sweep limit reached", 0.0);
    rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double alpha = dot(t.row(i), t.row(i));
        const double beta = dot(t.row(j), t.row(j));
        const double gamma = dot(t.row(i), t.row(j));
        if (alpha == 0.0 || beta == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double tn = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, tn);
        const double s = c * tn;
        rotate(t.row(i), t.row(j), c, s);
        rotate(vt.row(i), vt.row(j), c, s);
        rotated = true;
      }
    }
  }

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = std::sqrt(dot(t.row(i), t.row(i)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  EconomySVD out;
  out.u_slice = DenseMatrix(m, n);
  out.v_slice = DenseMatrix(n, n);
  std::vector<double> d(n);
  std::vector<std::size_t> filled, empty;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    d[k] = norms[src];
    for (std::size_t i = 0; i < n; ++i) out.v_slice(i, k) = vt(src, i);
    if (d[k] == 0.0) {
      empty.push_back(k);
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) out.u_slice(i, k) = t(src, i) / d[k];
    filled.push_back(k);
  }
  if (!empty.empty()) {
    DenseMatrix have(m, filled.size());
    for (std::size_t k = 0; k < filled.size(); ++k)
      for (std::size_t i = 0; i < m; ++i) have(i, k) = out.u_slice(i, filled[k]);
    const DenseMatrix comp = orthonormal_complement(have);
    for (std::size_t k = 0; k < empty.size(); ++k)
      for (std::size_t i = 0; i < m; ++i) out.u_slice(i, empty[k]) = comp(i, k);
  }
  out.d = DiagonalMatrix(std::move(d));
  return out;
}

}  // namespace

EconomySVD svd_jacobi(const DenseMatrix& a, double tol, std::size_t max_sweeps) {
  if (a.rows() >= a.cols()) return one_sided_jacobi(transpose(a), tol, max_sweeps);
  EconomySVD t = one_sided_jacobi(a, tol, max_sweeps);
  std::swap(t.u_slice, t.v_slice);
  return t;
}

EconomySVD svd_jacobi_truncated(const DenseMatrix& a, double tol_rank) {
  if (a.rows() == 0 || a.cols() == 0) return {DenseMatrix(a.rows(), 0), {}, DenseMatrix(a.cols(), 0)};
  return truncate(svd_jacobi(a), tol_rank);
}

}  // namespace bsvd
