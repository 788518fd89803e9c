#pragma once

// Comparison of factored approximations against a dense reference.

#include "srlpm/altmin.hpp"
#include "srlpm/graph_io.hpp"
#include "srlpm/kernels.hpp"
#include "srlpm/quadmin.hpp"
#include "srlpm/rsvd.hpp"
#include "srlpm/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srlpm {

enum class FactorKind : std::uint8_t { pair = 0, symmetric = 1, spectral = 2 };

std::string to_string(FactorKind kind);

/// Any factored similarity S~ = I + M, normalized to M = L R^T (pair,
/// spectral) or M = off(L R^T) with L = R (symmetric).
class Approximation {
 public:
  explicit Approximation(FactorPair f);
  explicit Approximation(SymmetricFactor f);
  explicit Approximation(SpectralFactor f);

  FactorKind kind() const { return kind_; }
  Index n() const { return left_.rows(); }
  Index rank() const { return left_.cols(); }
  const Matrix& left() const { return left_; }
  const Matrix& right() const { return right_; }
  bool zero_diagonal() const { return zero_diagonal_; }

  /// Rows [begin, begin + count) of S~ as a dense count x n block.
  Matrix rows(Index begin, Index count) const;
  /// Entry (i, j) of M = S~ - I.
  double shift_entry(Index i, Index j) const;

 private:
  FactorKind kind_;
  Matrix left_;
  Matrix right_;
  bool zero_diagonal_ = false;
};

/// max |S_ref - S~| over all entries, streaming S~ in row blocks.
double chebyshev_error(const Matrix& s_ref, const Approximation& approx,
                       Index block_rows = 256);

/// Indices of the N largest entries of `row`, excluding `self`, ordered by
/// descending score with ties broken by ascending index.
std::vector<Index> top_n_set(const Eigen::Ref<const Vector>& row, Index self,
                             Index top_n);

/// Psi(N) = sum_i |top_N(S_ref, i) & top_N(S~, i)| / (N n).
double psi(const Matrix& s_ref, const Approximation& approx, Index top_n);

/// Psi for several N from one pass over the rows.
std::map<Index, double> psi_many(const Matrix& s_ref,
                                 const Approximation& approx,
                                 const std::vector<Index>& top_ns,
                                 Index block_rows = 256);

struct FrobeniusResidual {
  /// ||M - c off(A^T M A) - B||_F (exact, or the square root of the estimate)
  double value = 0.0;
  /// Estimate of the squared norm, and its standard error when sampled.
  double squared = 0.0;
  std::optional<double> squared_standard_error;
  Index samples = 0;
  bool sampled = false;
};

struct FrobeniusOptions {
  enum class Mode { automatic, dense, sampled };
  Mode mode = Mode::automatic;
  Index samples = 100000;
  std::uint64_t seed = 0;
};

/// Residual of the factored fixed-point equation with M = S~ - I. Exact
/// through a dense n x n evaluation under the dense cap; otherwise an
/// unbiased estimate of the squared norm from uniformly sampled entries.
FrobeniusResidual frobenius_residual(const Approximation& approx,
                                     const NormalizedAdjacency& a,
                                     const ShiftMatrix& b, double c,
                                     const FrobeniusOptions& options = {});

struct EvalReport {
  std::string dataset;
  std::string solver;
  Index rank = 0;
  std::optional<std::uint64_t> seed;
  double c = kDefaultDecay;
  double chebyshev_error = 0.0;
  std::map<Index, double> psi;
  double wall_time_s = 0.0;
};

nlohmann::json to_json(const EvalReport& report);
std::string csv_header(const EvalReport& report);
std::string csv_row(const EvalReport& report);

}  // namespace srlpm
