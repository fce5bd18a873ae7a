#pragma once

// Product kernels shared by every module. Each kernel exists twice: a plain
// serial loop nest and an OpenMP version that splits output rows across
// threads. Both accumulate every output element in the same order, so their
// results are bit-identical; the serial one is the test reference.

#include <cstddef>
#include <span>

#include "bsvd/dense.hpp"
#include "bsvd/entry.hpp"

namespace bsvd::kernels {

namespace serial {

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b);

/// (n_rows × ·) sparse times dense. `entries` sorted row-major.
DenseMatrix sparse_dense(std::span<const Entry> entries, std::size_t n_rows, const DenseMatrix& b);

/// Xᵗ·Y for two sparse matrices sharing n_rows; both entry lists sorted
/// row-major. Result is x_cols × y_cols.
DenseMatrix sparse_tn_sparse(std::span<const Entry> x, std::size_t x_cols, std::span<const Entry> y,
                             std::size_t y_cols, std::size_t n_rows);

}  // namespace serial

namespace parallel {

DenseMatrix gemm_nn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix gemm_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix gemm_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sparse_dense(std::span<const Entry> entries, std::size_t n_rows, const DenseMatrix& b);
DenseMatrix sparse_tn_sparse(std::span<const Entry> x, std::size_t x_cols, std::span<const Entry> y,
                             std::size_t y_cols, std::size_t n_rows);

}  // namespace parallel

/// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace bsvd::kernels
