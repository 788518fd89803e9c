#include "srlpm/altmin.hpp"

#include <cmath>

namespace srlpm {

namespace {

double relative_change(const Matrix& next, const Matrix& prev) {
  const double base = prev.norm();
  const double diff = (next - prev).norm();
  return base > 0.0 ? diff / base : diff;
}

}  // namespace

void validate(const AltMinConfig& cfg, Index n) {
  if (cfg.rank < 1 || cfg.rank > n) {
    throw DimensionError("altmin: rank " + std::to_string(cfg.rank) +
                         " outside [1, " + std::to_string(n) + "]");
  }
  if (cfg.outer_iters < 0 || cfg.inner_iters < 0) {
    throw std::invalid_argument("altmin: iteration counts must be >= 0");
  }
  if (!(cfg.stop_tol >= 0.0)) {
    throw std::invalid_argument("altmin: stop_tol must be >= 0");
  }
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) {
    throw std::invalid_argument("altmin: c must lie in (0, 1)");
  }
}

FixedFactorUpdate::FixedFactorUpdate(const Matrix& fixed,
                                     const Pseudoinverse& pinv,
                                     const NormalizedAdjacency& a,
                                     const SparseMatrix& constant, double c)
    : a_(&a), c_(c) {
  const Index n = a.n();
  detail::require_shape(
      fixed.rows() == n && pinv.transposed.rows() == n &&
          pinv.transposed.cols() == fixed.cols() && constant.rows() == n &&
          constant.cols() == n,
      "altmin update: fixed factor is " +
          detail::shape_str(fixed.rows(), fixed.cols()) + ", n = " +
          std::to_string(n));
  at_fixed_ = a.transposed() * fixed;
  pinv_t_ = pinv.transposed;
  coupling_ = at_fixed_.transpose() * pinv_t_;
  constant_term_ = constant.transpose() * pinv_t_;
}

Matrix FixedFactorUpdate::operator()(const Matrix& free) const {
  detail::require_shape(free.rows() == pinv_t_.rows() &&
                            free.cols() == pinv_t_.cols(),
                        "altmin update: free factor is " +
                            detail::shape_str(free.rows(), free.cols()));
  const Matrix at_free = a_->transposed() * free;
  const Vector d = (at_fixed_.array() * at_free.array()).rowwise().sum();
  Matrix next = constant_term_;
  next.noalias() += c_ * (at_free * coupling_);
  next -= c_ * (d.asDiagonal() * pinv_t_);
  return next;
}

Matrix altmin_update_v(const Matrix& u_fix, const Pseudoinverse& u_pinv,
                       const Matrix& v, const NormalizedAdjacency& a,
                       const ShiftMatrix& b, double c) {
  return FixedFactorUpdate(u_fix, u_pinv, a, b.mat, c)(v);
}

Matrix altmin_update_u(const Matrix& v_fix, const Pseudoinverse& v_pinv,
                       const Matrix& u, const NormalizedAdjacency& a,
                       const ShiftMatrix& b, double c) {
  const SparseMatrix bt = b.mat.transpose();
  return FixedFactorUpdate(v_fix, v_pinv, a, bt, c)(u);
}

namespace {

// U V^T is unchanged by U D, V D^-1, and so is every later least-squares
// update. Equal column norms keep the factors from drifting apart in scale,
// which would otherwise put a rounding floor of eps ||U|| ||V|| under U V^T.
void balance_columns(Matrix& u, Matrix& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    const double nu = u.col(j).norm();
    const double nv = v.col(j).norm();
    if (nu == 0.0 || nv == 0.0) continue;
    const double s = std::sqrt(nv / nu);
    u.col(j) *= s;
    v.col(j) /= s;
  }
}

}  // namespace

AltMinResult run_altmin(const NormalizedAdjacency& a, const AltMinConfig& cfg,
                        const AltMinObserver& observer) {
  const Index n = a.n();
  validate(cfg, n);
  const ShiftMatrix b = build_shift(a, cfg.c);
  const SparseMatrix bt = b.mat.transpose();

  auto rng = make_rng(cfg.seed);
  AltMinResult result;
  FactorPair& f = result.factors;
  f.u = gaussian_matrix(n, cfg.rank, rng);
  f.v = gaussian_matrix(n, cfg.rank, rng);

  for (int m = 0; m < cfg.outer_iters; ++m) {
    AltMinIterate it;
    it.outer = m;

    const Pseudoinverse u_pinv = pseudoinverse(f.u);
    const FixedFactorUpdate update_v(f.u, u_pinv, a, b.mat, cfg.c);
    Matrix v = f.v;
    for (int k = 0; k < cfg.inner_iters; ++k) v = update_v(v);
    if (!v.allFinite()) {
      result.failure = "altmin: V became non-finite at outer iteration " +
                       std::to_string(m);
      return result;
    }

    const Pseudoinverse v_pinv = pseudoinverse(v);
    const FixedFactorUpdate update_u(v, v_pinv, a, bt, cfg.c);
    Matrix u = f.u;
    for (int k = 0; k < cfg.inner_iters; ++k) u = update_u(u);
    if (!u.allFinite()) {
      f.v = std::move(v);
      result.failure = "altmin: U became non-finite at outer iteration " +
                       std::to_string(m);
      return result;
    }

    balance_columns(u, v);
    it.u_change = relative_change(u, f.u);
    it.v_change = relative_change(v, f.v);
    it.pinv_rank_deficient = u_pinv.rank_deficient || v_pinv.rank_deficient;
    f.u = std::move(u);
    f.v = std::move(v);
    result.outer_done = m + 1;
    result.trace.push_back(it);
    if (observer) observer(it, f);
    if (std::max(it.u_change, it.v_change) <= cfg.stop_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace srlpm
