#pragma once

// Newton iteration on grad f(U) = 0 for
//
//   f(U) = || Phi(U U^T) - B ||_F^2,
//
// producing the symmetric form S~ = I + off(U U^T). The Newton system is
// solved matrix-free with GMRES.

#include "srlpm/gmres.hpp"
#include "srlpm/graph_io.hpp"
#include "srlpm/kernels.hpp"
#include "srlpm/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace srlpm {

/// S~ = I + off(U U^T): unit diagonal and symmetric for every U.
struct SymmetricFactor {
  Matrix u;

  Index n() const { return u.rows(); }
  Index rank() const { return u.cols(); }
};

enum class ResidualMode { none, exact_dense };

struct QuadMinConfig {
  Index rank = 1;
  int newton_iters = 30;
  int gmres_iters = 15;
  double gmres_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Standard deviation of the Gaussian start; 1/sqrt(rank) when unset.
  std::optional<double> init_scale;
  double c = kDefaultDecay;
  ResidualMode residual_mode = ResidualMode::none;
  /// Stop when ||dU||_F / ||U||_F falls to this.
  double step_tol = 1e-6;
};

void validate(const QuadMinConfig& cfg, Index n);

/// Everything f, grad f and J need that depends only on (A, c).
class QuadMinProblem {
 public:
  QuadMinProblem(const NormalizedAdjacency& a, double c);

  const NormalizedAdjacency& adjacency() const { return *a_; }
  const PhiOperator& phi() const { return phi_; }
  const ShiftMatrix& shift() const { return shift_; }
  /// Phi*(B) W without forming Phi*(B), whose A B A^T term fills in far
  /// beyond B on graphs with hubs.
  Matrix shift_adjoint_apply(const Matrix& w) const;
  double c() const { return phi_.c(); }
  Index n() const { return a_->n(); }

 private:
  const NormalizedAdjacency* a_;
  PhiOperator phi_;
  ShiftMatrix shift_;
  Vector outer_shift_diag_;  // diag(A B A^T)
};

/// f(U) from a dense Phi(U U^T); refuses n above the dense cap.
double residual_f(const Matrix& u, const NormalizedAdjacency& a,
                  const ShiftMatrix& b, double c);

/// f(U) evaluated exactly from the factored pieces in O(nnz(A^T A) r + n r^2)
/// time and O(n r + nnz) memory.
double residual_f_factored(const QuadMinProblem& problem, const Matrix& u);

/// grad f(U) = 4 (ffmp(U, U^T, U) - Phi*(B) U)
Matrix gradient(const QuadMinProblem& problem, const Matrix& u);

/// J(U)[X] = 4 (ffmp(X, U^T, U) + ffmp(U, X^T, U) + ffmp(U, U^T, X) - Phi*(B) X)
Matrix jacobian_apply(const QuadMinProblem& problem, const Matrix& u,
                      const Matrix& x);

/// Jacobian at a fixed U with the U-only pieces cached; cheaper than calling
/// jacobian_apply repeatedly.
class NewtonSystem {
 public:
  NewtonSystem(const QuadMinProblem& problem, const Matrix& u);

  Matrix gradient() const;
  Matrix apply(const Matrix& x) const;
  LinearOperatorHandle handle() const;

 private:
  const QuadMinProblem* problem_;
  Matrix u_;
  PhiImage phi_uu_;
  Vector phi_uu_outer_diag_;

  // Phi*(Phi(U U^T)) W
  Matrix phi_star_phi_uu(const Matrix& w) const;
};

struct QuadMinIterate {
  int iter = 0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  double gmres_residual = 0.0;
  int gmres_iterations = 0;
  /// Number of step halvings the safeguard applied.
  int halvings = 0;
  double f_factored = 0.0;
  std::optional<double> f_exact;
};

struct QuadMinResult {
  SymmetricFactor factor;
  std::vector<QuadMinIterate> trace;
  std::optional<double> f_initial_exact;
  bool converged = false;
  std::optional<std::string> failure;
};

using QuadMinObserver =
    std::function<void(const QuadMinIterate&, const SymmetricFactor&)>;

QuadMinResult run_quadmin(const NormalizedAdjacency& a,
                          const QuadMinConfig& cfg,
                          const QuadMinObserver& observer = {});

}  // namespace srlpm
