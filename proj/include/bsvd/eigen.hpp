#pragma once

#include <functional>

#include "bsvd/dense.hpp"

namespace bsvd {

/// a = vectors · diag(values) · vectorsᵗ with values non-increasing.
struct SymmetricEigen {
  DenseMatrix vectors;
  DiagonalMatrix values;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius mass is at most
/// tol·‖a‖_F. Throws SymmetryError when a is not symmetric within 1e-10
/// (relative to its largest entry) and ConvergenceError after `max_sweeps`.
SymmetricEigen jacobi_eigh(const DenseMatrix& a, double tol = 1e-14, std::size_t max_sweeps = 100);

/// vectors · diag(f(values)) · vectorsᵗ
DenseMatrix symmetric_function(const SymmetricEigen& eig, const std::function<double(double)>& f);

}  // namespace bsvd
