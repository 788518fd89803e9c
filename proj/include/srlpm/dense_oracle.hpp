#pragma once

// Dense reference solver for the SimRank fixed point S = c*off(A^T S A) + I.
// This is the only part of the library allowed O(n^2) storage.

#include "srlpm/graph_io.hpp"
#include "srlpm/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace srlpm {

/// Default refusal threshold on n for anything that materializes n x n.
inline constexpr Index kDefaultDenseCap = 20000;

/// Reads SRLPM_DENSE_CAP from the environment, falling back to the default.
Index dense_cap();

/// Throws CapacityError when n exceeds `cap`; `what` names the operation.
void require_dense_allowed(Index n, const std::string& what,
                           Index cap = dense_cap());

/// max_ij |X_ij|
double chebyshev_norm(const Matrix& x);

/// X with its diagonal zeroed.
Matrix off_part(const Matrix& x);

/// F(S) = c * off(A^T S A) + I.
Matrix fixed_point_step(const Matrix& s, const NormalizedAdjacency& a,
                        double c);

struct DenseSimilarity {
  Matrix values;
  double c = kDefaultDecay;
  int iterations = 0;
  /// Chebyshev norm of the last step S^(k) - S^(k-1).
  double residual_c = 0.0;
  bool converged = false;
  /// Chebyshev norm of every step, in order.
  std::vector<double> step_history;

  Index n() const { return values.rows(); }
};

struct FixedPointOptions {
  double c = kDefaultDecay;
  double tol = 1e-12;
  int max_iter = 1000;
  /// Starting iterate; identity when empty.
  std::optional<Matrix> initial;
  /// Called with (k, S^(k)) for k = 0 (the start) and after every step.
  std::function<void(int, const Matrix&)> observer;
};

/// Iterates S <- F(S) until the Chebyshev step size drops to `tol` or
/// `max_iter` steps were taken (converged == false in that case).
DenseSimilarity solve_fixed_point(const NormalizedAdjacency& a,
                                  const FixedPointOptions& options = {});

/// Descending singular values of S, or of S - I when `shift_identity`.
Vector singular_spectrum(const Matrix& s, bool shift_identity);

/// Chebyshev error of the best rank-r Frobenius approximation of S - I.
double truncated_svd_error(const Matrix& s, Index r);

/// Same as truncated_svd_error for several ranks from one decomposition.
std::vector<double> truncated_svd_errors(const Matrix& s,
                                         const std::vector<Index>& ranks);

}  // namespace srlpm
