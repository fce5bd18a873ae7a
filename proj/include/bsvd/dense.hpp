#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "bsvd/memory.hpp"

namespace bsvd {

using DenseStorage = std::vector<double, memory::TrackingAllocator<double>>;

/// Row-major dense matrix. Holds every block-local dense quantity; values are
/// required to be finite when supplied explicitly.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  /// Zero-filled rows × cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols);
  /// Takes row-major values; throws DimensionError on a size mismatch and
  /// UsageError on a non-finite value.
  DenseMatrix(std::size_t rows, std::size_t cols, std::span<const double> values);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<double> data() { return values_; }
  std::span<const double> data() const { return values_; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  /// Copy of the rows × cols sub-block starting at (r0, c0).
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);
  DenseMatrix columns(std::size_t c0, std::size_t count) const { return block(0, c0, rows_, count); }
  DenseMatrix rows_range(std::size_t r0, std::size_t count) const { return block(r0, 0, count, cols_); }

  DenseMatrix& operator+=(const DenseMatrix& b);
  DenseMatrix& operator-=(const DenseMatrix& b);
  DenseMatrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  DenseStorage values_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

/// Diagonal of singular values or eigenvalues, non-increasing by convention.
class DiagonalMatrix {
 public:
  DiagonalMatrix() = default;
  explicit DiagonalMatrix(std::vector<double> values) : values_(std::move(values)) {}
  DiagonalMatrix(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }

  bool is_non_increasing() const;
  double sum() const;
  DenseMatrix to_dense() const;

 private:
  std::vector<double> values_;
};

DenseMatrix transpose(const DenseMatrix& a);
/// a · b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵗ · b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a · bᵗ
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

/// a · diag(d)
DenseMatrix scale_columns(const DenseMatrix& a, std::span<const double> d);
/// diag(d) · a
DenseMatrix scale_rows(std::span<const double> d, const DenseMatrix& a);
/// [a | b]
DenseMatrix hstack(const DenseMatrix& a, const DenseMatrix& b);
/// [a ; b]
DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& a);
double frobenius_sq(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double trace(const DenseMatrix& a);
/// max |aᵢⱼ − bᵢⱼ|; throws DimensionError on shape mismatch.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
/// max |(qᵗq − I)ᵢⱼ|
double orthogonality_defect(const DenseMatrix& q);
/// Replaces a with (a + aᵗ)/2.
void symmetrize(DenseMatrix& a);

}  // namespace bsvd
