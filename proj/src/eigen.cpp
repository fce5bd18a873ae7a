#include "bsvd/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsvd/errors.hpp"

namespace bsvd {
namespace {

double off_diagonal_sq(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return s;
}

}  // namespace

SymmetricEigen jacobi_eigh(const DenseMatrix& input, double tol, std::size_t max_sweeps) {
  if (input.rows() != input.cols()) throw DimensionError("jacobi_eigh: matrix not square");
  const std::size_t n = input.rows();
  const double scale = max_abs(input);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-10 * std::max(scale, 1e-300)) {
        throw SymmetryError("jacobi_eigh: input is not symmetric");
      }

  DenseMatrix a = input;
  symmetrize(a);
  DenseMatrix q = DenseMatrix::identity(n);
  const double norm_sq = frobenius_sq(a);
  const double target = tol * tol * norm_sq;

  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_sq(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double app = a(p, p);
        const double arr = a(r, r);
        // Negligible against both diagonal entries: annihilate without rotating.
        if (std::abs(apr) < 1e-18 * (std::abs(app) + std::abs(arr))) {
          a(p, r) = a(r, p) = 0.0;
          continue;
        }
        const double theta = (arr - app) / (2.0 * apr);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // Rows p and r, then columns p and r.
        auto rp = a.row(p);
        auto rr = a.row(r);
        for (std::size_t j = 0; j < n; ++j) {
          const double x = rp[j];
          const double y = rr[j];
          rp[j] = c * x - s * y;
          rr[j] = s * x + c * y;
        }
        for (std::size_t i = 0; i < n; ++i) {
          auto row = a.row(i);
          const double x = row[p];
          const double y = row[r];
          row[p] = c * x - s * y;
          row[r] = s * x + c * y;
        }
        a(p, r) = a(r, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          auto row = q.row(i);
          const double x = row[p];
          const double y = row[r];
          row[p] = c * x - s * y;
          row[r] = s * x + c * y;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diagonal_sq(a) > target) {
    throw ConvergenceError("jacobi_eigh: sweep limit reached", std::sqrt(off_diagonal_sq(a)));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  std::vector<double> values(n);
  DenseMatrix vectors(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) vectors(i, k) = q(i, order[k]);
  }
  return {std::move(vectors), DiagonalMatrix(std::move(values))};
}

DenseMatrix symmetric_function(const SymmetricEigen& eig, const std::function<double(double)>& f) {
  std::vector<double> fv(eig.values.size());
  for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = f(eig.values[i]);
  DenseMatrix out = matmul_nt(scale_columns(eig.vectors, fv), eig.vectors);
  symmetrize(out);
  return out;
}

}  // namespace bsvd
