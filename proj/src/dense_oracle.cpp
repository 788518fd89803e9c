#include "srlpm/dense_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace srlpm {

namespace {

// Singular triplets of a square matrix, sorted by descending value. For
// symmetric input the eigendecomposition is used (sigma = |lambda|,
// right vectors carry the sign).
struct Svd {
  Vector sigma;
  Matrix left;
  Matrix right;
};

bool is_symmetric(const Matrix& x) {
  const double scale = std::max(1.0, chebyshev_norm(x));
  return (x - x.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

Svd decompose(const Matrix& x, bool want_vectors) {
  Svd out;
  if (is_symmetric(x)) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(
        x, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    const Vector& lambda = eig.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(lambda.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(lambda(a)) > std::abs(lambda(b));
    });
    out.sigma.resize(lambda.size());
    if (want_vectors) {
      out.left.resize(x.rows(), lambda.size());
      out.right.resize(x.rows(), lambda.size());
    }
    for (Index k = 0; k < lambda.size(); ++k) {
      const Index src = order[static_cast<std::size_t>(k)];
      out.sigma(k) = std::abs(lambda(src));
      if (want_vectors) {
        out.left.col(k) = eig.eigenvectors().col(src);
        out.right.col(k) =
            (lambda(src) < 0 ? -1.0 : 1.0) * eig.eigenvectors().col(src);
      }
    }
    return out;
  }
  const unsigned flags =
      want_vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Matrix> svd(x, flags);
  out.sigma = svd.singularValues();
  if (want_vectors) {
    out.left = svd.matrixU();
    out.right = svd.matrixV();
  }
  return out;
}

}  // namespace

Index dense_cap() {
  if (const char* env = std::getenv("SRLPM_DENSE_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
  }
  return kDefaultDenseCap;
}

void require_dense_allowed(Index n, const std::string& what, Index cap) {
  if (n > cap) {
    throw CapacityError(what + " needs a dense " + std::to_string(n) + "x" +
                        std::to_string(n) + " matrix; n exceeds the dense cap " +
                        std::to_string(cap) + " (set SRLPM_DENSE_CAP to raise it)");
  }
}

double chebyshev_norm(const Matrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

Matrix off_part(const Matrix& x) {
  detail::require_shape(x.rows() == x.cols(),
                        "off_part: matrix must be square, got " +
                            detail::shape_str(x.rows(), x.cols()));
  Matrix y = x;
  y.diagonal().setZero();
  return y;
}

Matrix fixed_point_step(const Matrix& s, const NormalizedAdjacency& a,
                        double c) {
  detail::require_shape(s.rows() == a.n() && s.cols() == a.n(),
                        "fixed_point_step: S is " +
                            detail::shape_str(s.rows(), s.cols()) +
                            ", adjacency has n = " + std::to_string(a.n()));
  const SparseMatrix& at = a.transposed();
  // A^T S A = A^T (A^T S^T)^T
  Matrix w = at * s.transpose();
  Matrix next = at * w.transpose();
  next *= c;
  next.diagonal().setOnes();
  return next;
}

DenseSimilarity solve_fixed_point(const NormalizedAdjacency& a,
                                  const FixedPointOptions& options) {
  const Index n = a.n();
  require_dense_allowed(n, "dense fixed-point solve");
  DenseSimilarity out;
  out.c = options.c;
  Matrix s = options.initial ? *options.initial : Matrix::Identity(n, n);
  detail::require_shape(s.rows() == n && s.cols() == n,
                        "solve_fixed_point: initial iterate has wrong shape");
  if (options.observer) options.observer(0, s);
  for (int k = 1; k <= options.max_iter; ++k) {
    Matrix next = fixed_point_step(s, a, options.c);
    const double step = chebyshev_norm(next - s);
    s = std::move(next);
    out.iterations = k;
    out.residual_c = step;
    out.step_history.push_back(step);
    if (options.observer) options.observer(k, s);
    if (step <= options.tol) {
      out.converged = true;
      break;
    }
  }
  out.values = std::move(s);
  return out;
}

Vector singular_spectrum(const Matrix& s, bool shift_identity) {
  detail::require_shape(s.rows() == s.cols(),
                        "singular_spectrum: matrix must be square");
  if (!shift_identity) return decompose(s, false).sigma;
  Matrix shifted = s;
  shifted.diagonal().array() -= 1.0;
  return decompose(shifted, false).sigma;
}

std::vector<double> truncated_svd_errors(const Matrix& s,
                                         const std::vector<Index>& ranks) {
  const Index n = s.rows();
  detail::require_shape(s.cols() == n,
                        "truncated_svd_error: matrix must be square");
  for (Index r : ranks) {
    if (r < 0 || r > n) {
      throw DimensionError("truncated_svd_error: rank " + std::to_string(r) +
                           " outside [0, " + std::to_string(n) + "]");
    }
  }
  Matrix shifted = s;
  shifted.diagonal().array() -= 1.0;
  const bool need_vectors =
      std::any_of(ranks.begin(), ranks.end(), [](Index r) { return r > 0; });
  const Svd svd = need_vectors ? decompose(shifted, true) : Svd{};
  std::vector<double> errors;
  errors.reserve(ranks.size());
  for (Index r : ranks) {
    if (r == 0) {
      errors.push_back(chebyshev_norm(shifted));
      continue;
    }
    Matrix approx = svd.left.leftCols(r) *
                    svd.sigma.head(r).asDiagonal() *
                    svd.right.leftCols(r).transpose();
    errors.push_back(chebyshev_norm(shifted - approx));
  }
  return errors;
}

double truncated_svd_error(const Matrix& s, Index r) {
  return truncated_svd_errors(s, {r}).front();
}

}  // namespace srlpm
