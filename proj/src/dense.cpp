#include "bsvd/dense.hpp"

#include <algorithm>
#include <cmath>

#include "bsvd/errors.hpp"
#include "bsvd/kernels.hpp"

namespace bsvd {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> values)
    : rows_(rows), cols_(cols) {
  if (values.size() != rows * cols) throw DimensionError("DenseMatrix: value count does not match shape");
  for (double v : values) {
    if (!std::isfinite(v)) throw UsageError("DenseMatrix: non-finite value");
  }
  values_.assign(values.begin(), values.end());
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("DenseMatrix::from_rows: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, flat);
}

std::vector<double> DenseMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionError("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
  if (r0 + rows > rows_ || c0 + cols > cols_) throw DimensionError("block: range outside matrix");
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy_n(values_.data() + (r0 + i) * cols_ + c0, cols, out.values_.data() + i * cols);
  }
  return out;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("set_block: range outside matrix");
  for (std::size_t i = 0; i < b.rows(); ++i) {
    std::copy_n(b.values_.data() + i * b.cols(), b.cols(), values_.data() + (r0 + i) * cols_ + c0);
  }
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& b) {
  if (rows_ != b.rows_ || cols_ != b.cols_) throw DimensionError("operator+=: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += b.values_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& b) {
  if (rows_ != b.rows_ || cols_ != b.cols_) throw DimensionError("operator-=: shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= b.values_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
  a += b;
  return a;
}

DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
  a -= b;
  return a;
}

DenseMatrix operator*(double s, DenseMatrix a) {
  a *= s;
  return a;
}

bool DiagonalMatrix::is_non_increasing() const {
  return std::is_sorted(values_.begin(), values_.end(), std::greater<>());
}

double DiagonalMatrix::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

DenseMatrix DiagonalMatrix::to_dense() const {
  DenseMatrix m(values_.size(), values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) m(i, i) = values_[i];
  return m;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) { return kernels::parallel::gemm_nn(a, b); }
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) { return kernels::parallel::gemm_tn(a, b); }
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) { return kernels::parallel::gemm_nt(a, b); }

DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d) {
  if (d.size() != a.cols()) throw DimensionError("scale_columns: length mismatch");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= d[j];
  }
  return out;
}

DenseMatrix scale_rows(std::span<const double> d, const DenseMatrix& a) {
  if (d.size() != a.rows()) throw DimensionError("scale_rows: length mismatch");
  DenseMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double& v : out.row(i)) v *= d[i];
  return out;
}

DenseMatrix hstack(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hstack: row counts differ");
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  out.set_block(0, 0, a);
  out.set_block(0, a.cols(), b);
  return out;
}

DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("vstack: column counts differ");
  DenseMatrix out(a.rows() + b.rows(), a.cols());
  out.set_block(0, 0, a);
  out.set_block(a.rows(), 0, b);
  return out;
}

double frobenius_sq(const DenseMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

double frobenius_norm(const DenseMatrix& a) { return std::sqrt(frobenius_sq(a)); }

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double trace(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double orthogonality_defect(const DenseMatrix& q) {
  const DenseMatrix g = kernels::parallel::gemm_tn(q, q);
  double m = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) m = std::max(m, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

void symmetrize(DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetrize: matrix not square");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }
  }
}

}  // namespace bsvd
