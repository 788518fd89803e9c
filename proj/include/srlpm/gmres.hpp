#pragma once

#include "srlpm/types.hpp"

#include <functional>

namespace srlpm {

/// Linear map on n x r matrices, treated as vectors of length n*r under the
/// Frobenius inner product.
struct LinearOperatorHandle {
  std::function<Matrix(const Matrix&)> apply;
  Index rows = 0;
  Index cols = 0;
};

struct GmresResult {
  Matrix solution;
  /// ||op(x) - rhs||_F / ||rhs||_F from the Arnoldi recurrence.
  double relative_residual = 0.0;
  int iterations = 0;
  /// The Krylov space became invariant; the solution is exact.
  bool breakdown = false;
};

/// Unrestarted GMRES from a zero initial guess with at most `max_iters`
/// Arnoldi steps; stops early once the relative residual reaches `tol`.
GmresResult gmres_solve(const LinearOperatorHandle& op, const Matrix& rhs,
                        int max_iters, double tol);

}  // namespace srlpm
