#pragma once

// Small dense helpers on tall-skinny matrices (n x k with k << n).

#include "srlpm/types.hpp"

#include <cstdint>
#include <random>

namespace srlpm {

/// i.i.d. N(0, 1) entries, filled column by column.
Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng);

/// Seeded generator for a (seed, stream) pair, e.g. one stream per iteration.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Orthonormal basis of range(Y) from a thin Householder QR (n x k).
Matrix orthonormal_basis(const Matrix& y);

/// Thin SVD of a tall matrix X = left * diag(sigma) * right^T, computed as a
/// Householder QR followed by an SVD of the k x k triangular factor.
struct ThinSvd {
  Matrix left;   // n x k
  Vector sigma;  // k, descending
  Matrix right;  // k x k
};

ThinSvd thin_svd(const Matrix& tall);

/// Moore-Penrose pseudoinverse of a tall n x r matrix, stored transposed
/// (n x r) since every caller multiplies by it from that side.
struct Pseudoinverse {
  Matrix transposed;
  Index rank = 0;
  /// True when a singular value fell under the cutoff and was dropped.
  bool rank_deficient = false;

  Matrix matrix() const { return transposed.transpose(); }
};

Pseudoinverse pseudoinverse(const Matrix& u);

}  // namespace srlpm
