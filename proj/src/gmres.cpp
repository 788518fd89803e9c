#include "srlpm/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace srlpm {

namespace {

double frobenius_dot(const Matrix& x, const Matrix& y) {
  return (x.array() * y.array()).sum();
}

}  // namespace

GmresResult gmres_solve(const LinearOperatorHandle& op, const Matrix& rhs,
                        int max_iters, double tol) {
  detail::require_shape(rhs.rows() == op.rows && rhs.cols() == op.cols,
                        "gmres: rhs is " +
                            detail::shape_str(rhs.rows(), rhs.cols()) +
                            ", operator acts on " +
                            detail::shape_str(op.rows, op.cols));
  if (max_iters < 1) throw std::invalid_argument("gmres: max_iters must be >= 1");

  GmresResult out;
  out.solution = Matrix::Zero(rhs.rows(), rhs.cols());
  const double beta = rhs.norm();
  if (beta == 0.0) return out;

  const auto m = static_cast<Index>(max_iters);
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(m) + 1);
  basis.push_back(rhs / beta);

  Matrix h = Matrix::Zero(m + 1, m);
  Vector cs = Vector::Zero(m);
  Vector sn = Vector::Zero(m);
  Vector g = Vector::Zero(m + 1);
  g(0) = beta;

  Index steps = 0;
  for (Index j = 0; j < m; ++j) {
    Matrix w = op.apply(basis[static_cast<std::size_t>(j)]);
    const double w_norm0 = w.norm();
    // Modified Gram-Schmidt with one re-orthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i <= j; ++i) {
        const Matrix& vi = basis[static_cast<std::size_t>(i)];
        const double hij = frobenius_dot(w, vi);
        h(i, j) += hij;
        w -= hij * vi;
      }
    }
    const double w_norm = w.norm();
    h(j + 1, j) = w_norm;

    for (Index i = 0; i < j; ++i) {
      const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
      h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
      h(i, j) = t;
    }
    const double denom = std::hypot(h(j, j), h(j + 1, j));
    if (denom == 0.0) {
      cs(j) = 1.0;
      sn(j) = 0.0;
    } else {
      cs(j) = h(j, j) / denom;
      sn(j) = h(j + 1, j) / denom;
    }
    h(j, j) = denom;
    h(j + 1, j) = 0.0;
    g(j + 1) = -sn(j) * g(j);
    g(j) = cs(j) * g(j);

    steps = j + 1;
    out.relative_residual = std::abs(g(j + 1)) / beta;
    const bool invariant =
        w_norm <= 1e-14 * std::max(w_norm0, std::numeric_limits<double>::min());
    if (invariant) {
      out.breakdown = true;
      if (denom == 0.0) {
        // op is singular on the Krylov space; keep the previous iterate.
        steps = j;
        out.relative_residual = std::abs(g(j)) / beta;
      } else {
        out.relative_residual = 0.0;
      }
      break;
    }
    if (out.relative_residual <= tol || j + 1 == m) break;
    basis.push_back(w / w_norm);
  }

  const Vector y = h.topLeftCorner(steps, steps)
                       .triangularView<Eigen::Upper>()
                       .solve(g.head(steps));
  for (Index i = 0; i < steps; ++i) {
    out.solution += y(i) * basis[static_cast<std::size_t>(i)];
  }
  out.iterations = static_cast<int>(steps);
  return out;
}

}  // namespace srlpm
