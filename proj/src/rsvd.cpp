#include "srlpm/rsvd.hpp"

#include "srlpm/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace srlpm {

namespace {

constexpr double kCollapseRatio = 1e-12;
// Stream id reserved for the starting subspace; iteration k uses stream k.
constexpr std::uint64_t kInitStream = 0xFFFF'FFFF'FFFF'FFFFULL;

Matrix scaled_left(const SpectralFactor& m) {
  return m.left * m.sigma.asDiagonal();
}

// Number of leading singular values that are not negligible.
Index effective_rank(const Vector& sigma) {
  if (sigma.size() == 0 || !(sigma(0) > 0.0)) return 0;
  const double cutoff = kCollapseRatio * sigma(0);
  Index k = 0;
  while (k < sigma.size() && sigma(k) > cutoff) ++k;
  return k;
}

SpectralFactor truncate(SpectralFactor m, Index rank) {
  m.left = m.left.leftCols(rank).eval();
  m.right = m.right.leftCols(rank).eval();
  m.sigma = m.sigma.head(rank).eval();
  return m;
}

void check_factor(const SpectralFactor& m, Index n) {
  detail::require_shape(
      m.left.rows() == n && m.right.rows() == n &&
          m.left.cols() == m.sigma.size() && m.right.cols() == m.sigma.size(),
      "spectral factor does not match n = " + std::to_string(n));
}

}  // namespace

Matrix sketch_apply(const SpectralFactor& m, const NormalizedAdjacency& a,
                    const ShiftMatrix& b, double c, const Matrix& omega) {
  check_factor(m, a.n());
  detail::require_shape(omega.rows() == a.n(),
                        "sketch_apply: Omega has " +
                            std::to_string(omega.rows()) + " rows");
  const Matrix at_left = a.transposed() * scaled_left(m);
  const Matrix at_right = a.transposed() * m.right;
  const Vector d = (at_left.array() * at_right.array()).rowwise().sum();
  Matrix y = b.mat * omega;
  y.noalias() += c * (at_left * (at_right.transpose() * omega));
  y -= c * (d.asDiagonal() * omega);
  return y;
}

Matrix sketch_apply_transposed(const SpectralFactor& m,
                               const NormalizedAdjacency& a,
                               const ShiftMatrix& b, double c,
                               const Matrix& q) {
  check_factor(m, a.n());
  detail::require_shape(q.rows() == a.n(),
                        "sketch_apply_transposed: operand has " +
                            std::to_string(q.rows()) + " rows");
  const Matrix at_left = a.transposed() * scaled_left(m);
  const Matrix at_right = a.transposed() * m.right;
  const Vector d = (at_left.array() * at_right.array()).rowwise().sum();
  Matrix y = b.mat.transpose() * q;
  y.noalias() += c * (at_right * (at_left.transpose() * q));
  y -= c * (d.asDiagonal() * q);
  return y;
}

SpectralFactor shift_svd(const ShiftMatrix& b, Index r, Index oversample,
                         std::uint64_t seed, int power_iters) {
  const Index n = b.n();
  const Index k = std::min(n, r + oversample);
  auto rng = make_rng(seed, kInitStream);
  Matrix q = orthonormal_basis(b.mat * gaussian_matrix(n, k, rng));
  for (int i = 0; i < power_iters; ++i) q = orthonormal_basis(b.mat * q);

  Matrix t = q.transpose() * (b.mat * q);
  t = 0.5 * (t + t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return std::abs(eig.eigenvalues()(x)) > std::abs(eig.eigenvalues()(y));
  });

  SpectralFactor m;
  m.oversample = oversample;
  const Index keep = std::min(r, k);
  m.left.resize(n, keep);
  m.right.resize(n, keep);
  m.sigma.resize(keep);
  for (Index i = 0; i < keep; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    const double lambda = eig.eigenvalues()(src);
    m.left.col(i) = q * eig.eigenvectors().col(src);
    m.right.col(i) = (lambda < 0.0 ? -1.0 : 1.0) * m.left.col(i);
    m.sigma(i) = std::abs(lambda);
  }
  return m;
}

SpectralFactor rsvd_step(const SpectralFactor& m, const NormalizedAdjacency& a,
                         const ShiftMatrix& b, double c, const Matrix& omega,
                         Index rank) {
  const Matrix q = orthonormal_basis(sketch_apply(m, a, b, c, omega));
  // Z = Q^T M_next = W diag(sigma) P^T from the thin SVD of Z^T.
  const ThinSvd svd = thin_svd(sketch_apply_transposed(m, a, b, c, q));
  const Index keep = std::min(rank, svd.sigma.size());
  SpectralFactor next;
  next.oversample = m.oversample;
  next.left = q * svd.right.leftCols(keep);
  next.sigma = svd.sigma.head(keep);
  next.right = svd.left.leftCols(keep);
  return next;
}

void validate(const RsvdConfig& cfg, Index n) {
  if (cfg.rank < 1 || cfg.rank > n) {
    throw DimensionError("rsvd: rank " + std::to_string(cfg.rank) +
                         " outside [1, " + std::to_string(n) + "]");
  }
  if (cfg.oversample < 0 || cfg.rank + cfg.oversample > n) {
    throw DimensionError("rsvd: rank + oversample = " +
                         std::to_string(cfg.rank + cfg.oversample) +
                         " exceeds n = " + std::to_string(n));
  }
  if (cfg.max_iters < 0) {
    throw std::invalid_argument("rsvd: max_iters must be >= 0");
  }
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) {
    throw std::invalid_argument("rsvd: c must lie in (0, 1)");
  }
}

RsvdResult run_rsvd(const NormalizedAdjacency& a, const RsvdConfig& cfg,
                    const RsvdObserver& observer) {
  const Index n = a.n();
  validate(cfg, n);
  const ShiftMatrix b = build_shift(a, cfg.c);

  RsvdResult result;
  SpectralFactor m = shift_svd(b, cfg.rank, cfg.oversample, cfg.seed);
  if (const Index achieved = effective_rank(m.sigma); achieved < cfg.rank) {
    result.collapsed_rank = achieved;
    result.factor = truncate(std::move(m), achieved);
    return result;
  }

  const Index width = cfg.rank + cfg.oversample;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(k));
    const Matrix omega = gaussian_matrix(n, width, rng);
    SpectralFactor next = rsvd_step(m, a, b, cfg.c, omega, cfg.rank);

    RsvdIterate it;
    it.iter = k;
    const double base = m.sigma.norm();
    it.sigma_change = base > 0.0 ? (next.sigma - m.sigma).norm() / base : 0.0;
    it.sigma_max = next.sigma.size() ? next.sigma(0) : 0.0;
    it.sigma_min = next.sigma.size() ? next.sigma(next.sigma.size() - 1) : 0.0;
    m = std::move(next);
    result.trace.push_back(it);

    if (const Index achieved = effective_rank(m.sigma); achieved < cfg.rank) {
      result.collapsed_rank = achieved;
      m = truncate(std::move(m), achieved);
      if (observer) observer(it, m);
      break;
    }
    if (observer) observer(it, m);
    if (it.sigma_change <= cfg.stop_tol) {
      result.converged = true;
      break;
    }
  }
  result.factor = std::move(m);
  return result;
}

}  // namespace srlpm
