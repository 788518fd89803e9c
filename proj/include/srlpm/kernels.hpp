#pragma once

// Matrix-free building blocks for the factored solvers. Nothing in this
// header allocates an n x n dense matrix.
//
// Notation: off(X) = X - diag(X),
//   Phi(X)  = off(X) - c*off(A^T off(X) A),
//   Phi*(X) = off(X) - c*off(A off(X) A^T)   (Frobenius adjoint of Phi).

#include "srlpm/graph_io.hpp"
#include "srlpm/types.hpp"

namespace srlpm {

/// Default fill guard for sparse-sparse products (stored nonzeros).
inline constexpr Index kDefaultSparseCap = 100'000'000;

/// Reads SRLPM_SPARSE_CAP from the environment, falling back to the default.
Index sparse_cap();

/// Upper bound on nnz(X * Y) from the structure of the operands.
Index product_nnz_bound(const SparseMatrix& x, const SparseMatrix& y);

/// B = c * off(A^T A), the constant term of both factored equations.
struct ShiftMatrix {
  SparseMatrix mat;
  double c = kDefaultDecay;

  Index n() const { return mat.rows(); }
};

ShiftMatrix build_shift(const NormalizedAdjacency& a, double c,
                        Index nnz_cap = sparse_cap());

/// diag(P Q) for P: n x r, Q: r x n, in O(nr).
Vector bilinear_diag(const Matrix& p, const Matrix& q);

/// diag(X Y) Z, i.e. the rows of Z scaled by bilinear_diag(X, Y).
Matrix dmmp(const Matrix& x, const Matrix& y, const Matrix& z);

/// Phi*(W) for sparse W, kept sparse.
SparseMatrix apply_phi_star_sparse(const SparseMatrix& w,
                                   const NormalizedAdjacency& a, double c,
                                   Index nnz_cap = sparse_cap());

class PhiOperator;

/// Implicit form of Phi(X Y^T) for tall X, Y (n x k):
///
///   X Y^T - diag(g) - c (A^T X)(A^T Y)^T + c A^T diag(g) A + c diag(h)
///
/// with g = diag(X Y^T) and h = diag((A^T X)(A^T Y)^T) - (A.*A)^T g.
/// The result has an exactly zero diagonal.
class PhiImage {
 public:
  PhiImage(const PhiOperator& op, Matrix left, Matrix right);

  /// Phi(X Y^T) W for W: n x m.
  Matrix apply(const Matrix& w) const;

  /// diag(A Phi(X Y^T) A^T), needed by the adjoint.
  Vector outer_diagonal() const;

  /// Entry (i, j) of Phi(X Y^T); O(k + deg) per call.
  double entry(Index i, Index j) const;

  const Matrix& left() const { return left_; }
  const Matrix& right() const { return right_; }

 private:
  const PhiOperator* op_;
  Matrix left_;
  Matrix right_;
  Matrix at_left_;
  Matrix at_right_;
  Vector g_;
  Vector h_;
};

/// Holds A, c and the sparse helpers (A.*A and (A A^T).*(A A^T)) used by
/// Phi/Phi* contractions. Immutable after construction.
class PhiOperator {
 public:
  PhiOperator(const NormalizedAdjacency& a, double c,
              Index nnz_cap = sparse_cap());

  const NormalizedAdjacency& adjacency() const { return *a_; }
  double c() const { return c_; }
  Index n() const { return a_->n(); }

  /// Phi(X Y^T) with X, Y given as n x k factors.
  PhiImage phi(Matrix left, Matrix right) const;

  /// ffmp: Phi*(Phi(X Y^T)) Z with X, Y: n x k and Z: n x m.
  Matrix phi_star_phi(const Matrix& left, const Matrix& right,
                      const Matrix& z) const;

  const SparseMatrix& squared_entries() const { return a_squared_; }
  const SparseMatrix& squared_entries_t() const { return a_squared_t_; }
  const SparseMatrix& coupling_squared() const { return coupling_squared_; }

 private:
  const NormalizedAdjacency* a_;
  double c_;
  SparseMatrix a_squared_;          // A .* A
  SparseMatrix a_squared_t_;        // (A .* A)^T
  SparseMatrix coupling_squared_;   // (A A^T) .* (A A^T)
};

/// ffmp(X, Y, Z) = Phi*(Phi(X Y)) Z with X: n x k, Y: k x n, Z: n x m.
Matrix ffmp(const PhiOperator& op, const Matrix& x, const Matrix& y,
            const Matrix& z);

}  // namespace srlpm
