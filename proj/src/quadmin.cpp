#include "srlpm/quadmin.hpp"

#include "srlpm/dense_oracle.hpp"
#include "srlpm/linalg.hpp"

#include <cmath>

namespace srlpm {

namespace {

constexpr int kMaxHalvings = 10;
constexpr double kGrowthAlarm = 10.0;

}  // namespace

void validate(const QuadMinConfig& cfg, Index n) {
  if (cfg.rank < 1 || cfg.rank > n) {
    throw DimensionError("quadmin: rank " + std::to_string(cfg.rank) +
                         " outside [1, " + std::to_string(n) + "]");
  }
  if (cfg.newton_iters < 0) {
    throw std::invalid_argument("quadmin: newton_iters must be >= 0");
  }
  if (cfg.gmres_iters < 1) {
    throw std::invalid_argument("quadmin: gmres_iters must be >= 1");
  }
  if (cfg.init_scale && !(*cfg.init_scale > 0.0)) {
    throw std::invalid_argument("quadmin: init_scale must be > 0");
  }
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) {
    throw std::invalid_argument("quadmin: c must lie in (0, 1)");
  }
}

QuadMinProblem::QuadMinProblem(const NormalizedAdjacency& a, double c)
    : a_(&a),
      phi_(a, c),
      shift_(build_shift(a, c)),
      outer_shift_diag_(Vector::Zero(a.n())) {
  // diag(A B A^T)_i = sum over out-neighbours k, l of i of A_ik B_kl A_il.
  // Column i of A^T holds row i of A.
  const SparseMatrix& at = a.transposed();
  const SparseMatrix& b = shift_.mat;
  for (Index i = 0; i < a.n(); ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator k(at, i); k; ++k) {
      SparseMatrix::InnerIterator l(at, i);
      SparseMatrix::InnerIterator bk(b, k.index());
      // Both lists are sorted by row; merge them.
      while (l && bk) {
        if (l.index() < bk.index()) {
          ++l;
        } else if (bk.index() < l.index()) {
          ++bk;
        } else {
          sum += k.value() * bk.value() * l.value();
          ++l;
          ++bk;
        }
      }
    }
    outer_shift_diag_(i) = sum;
  }
}

Matrix QuadMinProblem::shift_adjoint_apply(const Matrix& w) const {
  // B has a zero diagonal, so Phi*(B) = B - c off(A B A^T).
  const SparseMatrix& am = a_->matrix();
  const Matrix abat_w = am * (shift_.mat * (a_->transposed() * w));
  Matrix out = shift_.mat * w;
  out -= c() * (abat_w - outer_shift_diag_.asDiagonal() * w);
  return out;
}

double residual_f(const Matrix& u, const NormalizedAdjacency& a,
                  const ShiftMatrix& b, double c) {
  const Index n = a.n();
  detail::require_shape(u.rows() == n, "residual_f: U has " +
                                           std::to_string(u.rows()) +
                                           " rows, n = " + std::to_string(n));
  require_dense_allowed(n, "residual_f (exact-dense mode)");
  const Matrix off_g = off_part(u * u.transpose());
  const Matrix inner = a.transposed() * (a.transposed() * off_g).transpose();
  Matrix r = off_g - c * off_part(inner);
  r -= Matrix(b.mat);
  return r.squaredNorm();
}

double residual_f_factored(const QuadMinProblem& problem, const Matrix& u) {
  // Phi(U U^T) - B = off(L + E) with the low-rank part
  //   L = U U^T - c (A^T U)(A^T U)^T
  // and the sparse part E = c A^T diag(g) A - B, g = diag(U U^T).
  const NormalizedAdjacency& a = problem.adjacency();
  const double c = problem.c();
  const Index n = a.n();
  detail::require_shape(u.rows() == n, "residual_f: U has wrong row count");
  const Index r = u.cols();

  const Matrix atu = a.transposed() * u;
  const Vector g = u.rowwise().squaredNorm();

  Matrix stacked(n, 2 * r);
  stacked << u, atu;
  Vector signs(2 * r);
  signs << Vector::Ones(r), Vector::Constant(r, -c);
  const Matrix gram = signs.asDiagonal() * (stacked.transpose() * stacked);
  const double low_rank_sq = (gram.array() * gram.transpose().array()).sum();

  SparseMatrix weighted = g.asDiagonal() * a.matrix();
  SparseMatrix e = c * (a.transposed() * weighted) - problem.shift().mat;
  e.makeCompressed();

  double cross = 0.0;
  double sparse_sq = 0.0;
  Vector diag_e = Vector::Zero(n);
  for (Index j = 0; j < e.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(e, j); it; ++it) {
      const Index i = it.row();
      const double lij = u.row(i).dot(u.row(j)) - c * atu.row(i).dot(atu.row(j));
      cross += it.value() * lij;
      sparse_sq += it.value() * it.value();
      if (i == j) diag_e(i) += it.value();
    }
  }
  const Vector diag_l = g - c * atu.rowwise().squaredNorm();
  const double diag_sq = (diag_l + diag_e).squaredNorm();
  return std::max(0.0, low_rank_sq + 2.0 * cross + sparse_sq - diag_sq);
}

Matrix gradient(const QuadMinProblem& problem, const Matrix& u) {
  Matrix g = ffmp(problem.phi(), u, u.transpose(), u);
  g -= problem.shift_adjoint_apply(u);
  return 4.0 * g;
}

Matrix jacobian_apply(const QuadMinProblem& problem, const Matrix& u,
                      const Matrix& x) {
  detail::require_shape(x.rows() == u.rows() && x.cols() == u.cols(),
                        "jacobian_apply: X is " +
                            detail::shape_str(x.rows(), x.cols()) + ", U is " +
                            detail::shape_str(u.rows(), u.cols()));
  const PhiOperator& phi = problem.phi();
  const Matrix ut = u.transpose();
  Matrix j = ffmp(phi, x, ut, u);
  j += ffmp(phi, u, x.transpose(), u);
  j += ffmp(phi, u, ut, x);
  j -= problem.shift_adjoint_apply(x);
  return 4.0 * j;
}

NewtonSystem::NewtonSystem(const QuadMinProblem& problem, const Matrix& u)
    : problem_(&problem), u_(u), phi_uu_(problem.phi().phi(u, u)) {
  phi_uu_outer_diag_ = phi_uu_.outer_diagonal();
}

Matrix NewtonSystem::phi_star_phi_uu(const Matrix& w) const {
  const NormalizedAdjacency& a = problem_->adjacency();
  Matrix out = phi_uu_.apply(w);
  Matrix kw = a.matrix() * phi_uu_.apply(a.transposed() * w);
  kw -= phi_uu_outer_diag_.asDiagonal() * w;
  out.noalias() -= problem_->c() * kw;
  return out;
}

Matrix NewtonSystem::gradient() const {
  Matrix g = phi_star_phi_uu(u_);
  g -= problem_->shift_adjoint_apply(u_);
  return 4.0 * g;
}

Matrix NewtonSystem::apply(const Matrix& x) const {
  detail::require_shape(x.rows() == u_.rows() && x.cols() == u_.cols(),
                        "Newton system: direction has wrong shape");
  const Index n = u_.rows();
  const Index r = u_.cols();
  // Phi*(Phi(X U^T + U X^T)) U as one contraction with rank-2r factors.
  Matrix left(n, 2 * r);
  Matrix right(n, 2 * r);
  left << x, u_;
  right << u_, x;
  Matrix j = problem_->phi().phi_star_phi(left, right, u_);
  j += phi_star_phi_uu(x);
  j -= problem_->shift_adjoint_apply(x);
  return 4.0 * j;
}

LinearOperatorHandle NewtonSystem::handle() const {
  return {[this](const Matrix& x) { return apply(x); }, u_.rows(), u_.cols()};
}

QuadMinResult run_quadmin(const NormalizedAdjacency& a,
                          const QuadMinConfig& cfg,
                          const QuadMinObserver& observer) {
  const Index n = a.n();
  validate(cfg, n);
  if (cfg.residual_mode == ResidualMode::exact_dense) {
    require_dense_allowed(n, "quadmin exact-dense residual trace");
  }
  const QuadMinProblem problem(a, cfg.c);
  const double scale =
      cfg.init_scale.value_or(1.0 / std::sqrt(static_cast<double>(cfg.rank)));

  QuadMinResult result;
  auto rng = make_rng(cfg.seed);
  Matrix u = scale * gaussian_matrix(n, cfg.rank, rng);
  double f_prev = residual_f_factored(problem, u);
  if (cfg.residual_mode == ResidualMode::exact_dense) {
    result.f_initial_exact = residual_f(u, a, problem.shift(), cfg.c);
  }

  for (int k = 0; k < cfg.newton_iters; ++k) {
    QuadMinIterate it;
    it.iter = k + 1;
    const NewtonSystem system(problem, u);
    const Matrix grad = system.gradient();
    it.grad_norm = grad.norm();
    const GmresResult solve =
        gmres_solve(system.handle(), grad, cfg.gmres_iters, cfg.gmres_tol);
    it.gmres_residual = solve.relative_residual;
    it.gmres_iterations = solve.iterations;

    Matrix step = solve.solution;
    Matrix candidate = u - step;
    double f_new = residual_f_factored(problem, candidate);
    auto acceptable = [&] {
      return candidate.allFinite() && std::isfinite(f_new) &&
             f_new <= kGrowthAlarm * f_prev;
    };
    while (!acceptable() && it.halvings < kMaxHalvings) {
      step *= 0.5;
      ++it.halvings;
      candidate = u - step;
      f_new = candidate.allFinite() ? residual_f_factored(problem, candidate)
                                    : f_new;
    }
    if (!acceptable()) {
      result.failure = "quadmin: Newton step " + std::to_string(k + 1) +
                       " diverged after " + std::to_string(kMaxHalvings) +
                       " halvings";
      break;
    }

    it.step_norm = step.norm();
    u = std::move(candidate);
    f_prev = f_new;
    it.f_factored = f_new;
    if (cfg.residual_mode == ResidualMode::exact_dense) {
      it.f_exact = residual_f(u, a, problem.shift(), cfg.c);
    }
    result.trace.push_back(it);
    result.factor.u = u;
    if (observer) observer(it, result.factor);

    const double u_norm = u.norm();
    if (it.step_norm <= cfg.step_tol * (u_norm > 0.0 ? u_norm : 1.0)) {
      result.converged = true;
      break;
    }
  }
  result.factor.u = std::move(u);
  return result;
}

}  // namespace srlpm
