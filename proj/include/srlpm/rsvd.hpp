#pragma once

// Fixed-point iteration M <- c off(A^T M A) + B with every iterate truncated
// to rank r by a randomized SVD. This is the low-rank baseline the factored
// solvers are compared against; S~ = I + M.

#include "srlpm/graph_io.hpp"
#include "srlpm/kernels.hpp"
#include "srlpm/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace srlpm {

/// M = left * diag(sigma) * right^T with orthonormal columns in left/right.
struct SpectralFactor {
  Matrix left;
  Vector sigma;
  Matrix right;
  Index oversample = 0;

  Index n() const { return left.rows(); }
  Index rank() const { return sigma.size(); }
};

/// (c off(A^T M A) + B) Omega with M given by `m`; O(n (r + p)) memory.
Matrix sketch_apply(const SpectralFactor& m, const NormalizedAdjacency& a,
                    const ShiftMatrix& b, double c, const Matrix& omega);

/// (c off(A^T M A) + B)^T Q, the transposed contraction.
Matrix sketch_apply_transposed(const SpectralFactor& m,
                               const NormalizedAdjacency& a,
                               const ShiftMatrix& b, double c,
                               const Matrix& q);

/// Rank-r truncated SVD of the symmetric shift matrix via subspace
/// iteration; the starting iterate of the solver.
SpectralFactor shift_svd(const ShiftMatrix& b, Index r, Index oversample,
                         std::uint64_t seed, int power_iters = 6);

/// One iteration: sketch M_next = c off(A^T M A) + B with `omega`,
/// orthonormalize, project, and truncate the small SVD to `rank`.
SpectralFactor rsvd_step(const SpectralFactor& m, const NormalizedAdjacency& a,
                         const ShiftMatrix& b, double c, const Matrix& omega,
                         Index rank);

struct RsvdConfig {
  Index rank = 1;
  Index oversample = 10;
  int max_iters = 30;
  std::uint64_t seed = 0;
  /// Stop when ||sigma_k - sigma_{k-1}|| / ||sigma_{k-1}|| reaches this.
  double stop_tol = 1e-6;
  double c = kDefaultDecay;
};

void validate(const RsvdConfig& cfg, Index n);

struct RsvdIterate {
  int iter = 0;
  double sigma_change = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

struct RsvdResult {
  SpectralFactor factor;
  std::vector<RsvdIterate> trace;
  bool converged = false;
  /// Set when trailing singular values vanished; factor holds the
  /// achieved rank.
  std::optional<Index> collapsed_rank;
};

using RsvdObserver =
    std::function<void(const RsvdIterate&, const SpectralFactor&)>;

RsvdResult run_rsvd(const NormalizedAdjacency& a, const RsvdConfig& cfg,
                    const RsvdObserver& observer = {});

}  // namespace srlpm
