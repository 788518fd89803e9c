#pragma once

// Binary artifact formats. All integers and doubles are little-endian.
//
//   graph   "SRLG1" u64 n, u64 nnz, u64 col_ptr[n+1], u64 row_idx[nnz],
//           f64 val[nnz]
//   dense   "SRDS1" u64 n, f64 c, f64 values[n*n] (row-major)
//   factors "SRLF1" u8 kind, u64 n, u64 r, f64 c, then
//           kind 0: U[n*r], V[n*r]           (row-major)
//           kind 1: U[n*r]
//           kind 2: Q_left[n*r], sigma[r], Q_right[n*r]

#include "srlpm/altmin.hpp"
#include "srlpm/dense_oracle.hpp"
#include "srlpm/graph_io.hpp"
#include "srlpm/metrics.hpp"
#include "srlpm/quadmin.hpp"
#include "srlpm/rsvd.hpp"

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <variant>

namespace srlpm {

/// Runs `writer` against a temporary file next to `path`, then renames it
/// into place. The target is untouched if the writer throws.
void write_file_atomic(const std::string& path,
                       const std::function<void(std::ostream&)>& writer);

void write_graph(std::ostream& out, const NormalizedAdjacency& a);
NormalizedAdjacency read_graph(std::istream& in);

struct DenseDump {
  Matrix values;
  double c = kDefaultDecay;
};

void write_dense(std::ostream& out, const Matrix& s, double c);
DenseDump read_dense(std::istream& in);
DenseDump load_dense(const std::string& path);

using AnyFactor = std::variant<FactorPair, SymmetricFactor, SpectralFactor>;

struct FactorFile {
  AnyFactor factor;
  double c = kDefaultDecay;

  FactorKind kind() const { return static_cast<FactorKind>(factor.index()); }
  Index n() const;
  Index rank() const;
  Approximation approximation() const;
};

void write_factors(std::ostream& out, const AnyFactor& factor, double c);
FactorFile read_factors(std::istream& in);
FactorFile load_factors(const std::string& path);

}  // namespace srlpm
