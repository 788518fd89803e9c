#pragma once

// Alternating least-squares solver for S ~ I + U V^T.

#include "srlpm/graph_io.hpp"
#include "srlpm/kernels.hpp"
#include "srlpm/linalg.hpp"
#include "srlpm/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace srlpm {

/// S~ = I + U V^T, both factors n x r.
struct FactorPair {
  Matrix u;
  Matrix v;

  Index n() const { return u.rows(); }
  Index rank() const { return u.cols(); }
};

struct AltMinConfig {
  Index rank = 1;
  /// Outer iterations; each does one V block then one U block.
  int outer_iters = 20;
  /// Least-squares updates per block with the other factor held fixed.
  int inner_iters = 5;
  std::uint64_t seed = 0;
  /// Stop once the relative change of both factors over an outer iteration
  /// is at most this.
  double stop_tol = 1e-6;
  double c = kDefaultDecay;
};

void validate(const AltMinConfig& cfg, Index n);

/// Exact least-squares update of the free factor with `fixed` held constant:
///
///   free_new = argmin_F || fixed F^T - (c off(A^T fixed free^T A) + K) ||_F
///
/// where K = B for the V update and B^T for the U update. Everything that
/// depends only on `fixed` is computed once at construction, so repeated
/// inner updates cost O(nnz(A) r + n r^2).
class FixedFactorUpdate {
 public:
  FixedFactorUpdate(const Matrix& fixed, const Pseudoinverse& pinv,
                    const NormalizedAdjacency& a, const SparseMatrix& constant,
                    double c);

  Matrix operator()(const Matrix& free) const;

 private:
  const NormalizedAdjacency* a_;
  double c_;
  Matrix at_fixed_;       // A^T fixed
  Matrix pinv_t_;         // (fixed^+)^T
  Matrix coupling_;       // (A^T fixed)^T (fixed^+)^T, r x r
  Matrix constant_term_;  // K^T (fixed^+)^T
};

/// V <- (U_fix^+ (c off(A^T U_fix V^T A) + B))^T
Matrix altmin_update_v(const Matrix& u_fix, const Pseudoinverse& u_pinv,
                       const Matrix& v, const NormalizedAdjacency& a,
                       const ShiftMatrix& b, double c);

/// U <- (V_fix^+ (c off(A^T V_fix U^T A) + B^T))^T
Matrix altmin_update_u(const Matrix& v_fix, const Pseudoinverse& v_pinv,
                       const Matrix& u, const NormalizedAdjacency& a,
                       const ShiftMatrix& b, double c);

struct AltMinIterate {
  int outer = 0;
  double u_change = 0.0;  // ||U_new - U_old||_F / ||U_old||_F
  double v_change = 0.0;
  bool pinv_rank_deficient = false;
};

struct AltMinResult {
  FactorPair factors;
  std::vector<AltMinIterate> trace;
  int outer_done = 0;
  bool converged = false;
  /// Set when an iterate went non-finite; factors hold the last finite one.
  std::optional<std::string> failure;
};

using AltMinObserver =
    std::function<void(const AltMinIterate&, const FactorPair&)>;

AltMinResult run_altmin(const NormalizedAdjacency& a, const AltMinConfig& cfg,
                        const AltMinObserver& observer = {});

}  // namespace srlpm
