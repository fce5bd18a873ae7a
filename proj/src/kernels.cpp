#include "bsvd/kernels.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bsvd/errors.hpp"

namespace bsvd::kernels {
namespace {

// Below this many multiply-adds the OpenMP region costs more than it saves.
constexpr std::size_t kParallelThreshold = 1 << 15;

void check_nn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
}
void check_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
}
void check_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
}

// out.row(i) += Σ_k a(i,k) · b.row(k)
inline void nn_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  auto o = out.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    auto br = b.row(k);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += aik * br[j];
  }
}

inline void tn_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  auto o = out.row(i);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    if (aki == 0.0) continue;
    auto br = b.row(k);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += aki * br[j];
  }
}

inline void nt_row(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out, std::size_t i) {
  auto ar = a.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    auto br = b.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < ar.size(); ++k) s += ar[k] * br[k];
    out(i, j) = s;
  }
}

std::vector<std::size_t> row_offsets(std::span<const Entry> entries, std::size_t n_rows) {
  std::vector<std::size_t> offsets(n_rows + 1, 0);
  for (const auto& e : entries) ++offsets[e.row + 1];
  for (std::size_t r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
  return offsets;
}

struct ColumnIndex {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> rows;
  std::vector<double> values;
};

// Buckets row-major entries by column; rows stay ascending within a column.
ColumnIndex column_index(std::span<const Entry> entries, std::size_t n_cols) {
  ColumnIndex idx;
  idx.offsets.assign(n_cols + 1, 0);
  for (const auto& e : entries) ++idx.offsets[e.col + 1];
  for (std::size_t c = 0; c < n_cols; ++c) idx.offsets[c + 1] += idx.offsets[c];
  idx.rows.resize(entries.size());
  idx.values.resize(entries.size());
  std::vector<std::size_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (const auto& e : entries) {
    const std::size_t p = cursor[e.col]++;
    idx.rows[p] = e.row;
    idx.values[p] = e.value;
  }
  return idx;
}

void check_sparse(std::span<const Entry> entries, std::size_t n_rows, std::size_t n_cols) {
  for (const auto& e : entries) {
    if (e.row >= n_rows || e.col >= n_cols) throw DimensionError("sparse kernel: entry out of range");
  }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b) {
  check_nn(a, b);
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) nn_row(a, b, out, i);
  return out;
}

DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_tn(a, b);
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) tn_row(a, b, out, i);
  return out;
}

DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_nt(a, b);
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) nt_row(a, b, out, i);
  return out;
}

DenseMatrix sparse_dense(std::span<const Entry> entries, std::size_t n_rows, const DenseMatrix& b) {
  check_sparse(entries, n_rows, b.rows());
  DenseMatrix out(n_rows, b.cols());
  for (const auto& e : entries) {
    auto o = out.row(e.row);
    auto br = b.row(e.col);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] += e.value * br[j];
  }
  return out;
}

DenseMatrix sparse_tn_sparse(std::span<const Entry> x, std::size_t x_cols, std::span<const Entry> y,
                             std::size_t y_cols, std::size_t n_rows) {
  check_sparse(x, n_rows, x_cols);
  check_sparse(y, n_rows, y_cols);
  DenseMatrix out(x_cols, y_cols);
  const auto xo = row_offsets(x, n_rows);
  const auto yo = row_offsets(y, n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t p = xo[r]; p < xo[r + 1]; ++p) {
      for (std::size_t q = yo[r]; q < yo[r + 1]; ++q) {
        out(x[p].col, y[q].col) += x[p].value * y[q].value;
      }
    }
  }
  return out;
}

}  // namespace serial

namespace parallel {

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b) {
  check_nn(a, b);
  DenseMatrix out(a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.cols() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < n; ++i) nn_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_tn(a, b);
  DenseMatrix out(a.cols(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.cols() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < n; ++i) tn_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_nt(a, b);
  DenseMatrix out(a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  [[maybe_unused]] const bool big = a.rows() * a.cols() * b.rows() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t i = 0; i < n; ++i) nt_row(a, b, out, static_cast<std::size_t>(i));
  return out;
}

DenseMatrix sparse_dense(std::span<const Entry> entries, std::size_t n_rows, const DenseMatrix& b) {
  check_sparse(entries, n_rows, b.rows());
  DenseMatrix out(n_rows, b.cols());
  const auto offsets = row_offsets(entries, n_rows);
  const auto n = static_cast<std::ptrdiff_t>(n_rows);
  [[maybe_unused]] const bool big = entries.size() * b.cols() > kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (std::ptrdiff_t ri = 0; ri < n; ++ri) {
    const auto r = static_cast<std::size_t>(ri);
    auto o = out.row(r);
    for (std::size_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      auto br = b.row(entries[p].col);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += entries[p].value * br[j];
    }
  }
  return out;
}

DenseMatrix sparse_tn_sparse(std::span<const Entry> x, std::size_t x_cols, std::span<const Entry> y,
                             std::size_t y_cols, std::size_t n_rows) {
  check_sparse(x, n_rows, x_cols);
  check_sparse(y, n_rows, y_cols);
  DenseMatrix out(x_cols, y_cols);
  const auto xc = column_index(x, x_cols);
  const auto yo = row_offsets(y, n_rows);
  const auto n = static_cast<std::ptrdiff_t>(x_cols);
  [[maybe_unused]] const bool big = x.size() + y.size() > kParallelThreshold / 16;
#pragma omp parallel for schedule(dynamic, 8) if (big)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto o = out.row(i);
    for (std::size_t p = xc.offsets[i]; p < xc.offsets[i + 1]; ++p) {
      const std::size_t r = xc.rows[p];
      const double v = xc.values[p];
      for (std::size_t q = yo[r]; q < yo[r + 1]; ++q) o[y[q].col] += v * y[q].value;
    }
  }
  return out;
}

}  // namespace parallel
}  // namespace bsvd::kernels
