#include "srlpm/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <limits>

namespace srlpm {

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Matrix orthonormal_basis(const Matrix& y) {
  detail::require_shape(y.rows() >= y.cols(),
                        "orthonormal_basis: matrix must be tall, got " +
                            detail::shape_str(y.rows(), y.cols()));
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

ThinSvd thin_svd(const Matrix& tall) {
  const Index n = tall.rows();
  const Index k = tall.cols();
  detail::require_shape(n >= k, "thin_svd: matrix must be tall, got " +
                                    detail::shape_str(n, k));
  Eigen::HouseholderQR<Matrix> qr(tall);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ThinSvd out;
  const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  out.left = q * svd.matrixU();
  out.sigma = svd.singularValues();
  out.right = svd.matrixV();
  return out;
}

Pseudoinverse pseudoinverse(const Matrix& u) {
  const Index n = u.rows();
  const Index r = u.cols();
  detail::require_shape(n >= r, "pseudoinverse: expected n >= r, got " +
                                    detail::shape_str(n, r));
  const ThinSvd svd = thin_svd(u);
  const double cutoff = static_cast<double>(n) *
                        std::numeric_limits<double>::epsilon() *
                        (r > 0 ? svd.sigma(0) : 0.0);
  Vector inv = Vector::Zero(r);
  Pseudoinverse out;
  for (Index i = 0; i < r; ++i) {
    if (svd.sigma(i) > cutoff) {
      inv(i) = 1.0 / svd.sigma(i);
      ++out.rank;
    }
  }
  out.rank_deficient = out.rank < r;
  // (U^+)^T = left * diag(1/sigma) * right^T
  out.transposed = svd.left * inv.asDiagonal() * svd.right.transpose();
  return out;
}

}  // namespace srlpm
