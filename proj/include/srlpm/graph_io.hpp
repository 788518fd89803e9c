#pragma once

#include "srlpm/types.hpp"

#include <cstdint>
#include <istream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace srlpm {

/// Directed edge list with node ids remapped to [0, n) in order of first
/// appearance. Duplicate edges are dropped at parse time.
struct EdgeList {
  /// raw_ids[i] is the identifier that appeared in the file for dense index i.
  std::vector<std::uint64_t> raw_ids;
  std::unordered_map<std::uint64_t, Index> index_of;
  std::vector<std::pair<Index, Index>> edges;

  Index node_count() const { return static_cast<Index>(raw_ids.size()); }
};

/// Parses a SNAP-style edge list: '#' comment lines, blank lines ignored,
/// data lines hold two non-negative integers (extra tokens ignored).
/// Throws ParseError naming the 1-based line number on a malformed line.
EdgeList parse_edge_list(std::istream& in);
EdgeList read_edge_list_file(const std::string& path);

struct AdjacencyOptions {
  bool symmetrize = false;
  bool drop_self_loops = true;
};

/// Column-normalized adjacency operator: A(k, j) = 1/|I_j| when k -> j is an
/// edge, where I_j is the set of in-neighbours of j. Columns of nodes without
/// in-neighbours are empty.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;
  NormalizedAdjacency(SparseMatrix matrix, std::vector<Index> col_degree);

  Index n() const { return matrix_.cols(); }
  Index nnz() const { return matrix_.nonZeros(); }
  const SparseMatrix& matrix() const { return matrix_; }
  /// Explicit A^T in column-compressed form.
  const SparseMatrix& transposed() const { return transposed_; }
  const std::vector<Index>& col_degree() const { return col_degree_; }

 private:
  SparseMatrix matrix_;
  SparseMatrix transposed_;
  std::vector<Index> col_degree_;
};

NormalizedAdjacency build_adjacency(const EdgeList& edges,
                                    const AdjacencyOptions& options = {});

/// Convenience for tests and small examples: node ids are taken as dense
/// indices directly, n is given explicitly.
NormalizedAdjacency adjacency_from_pairs(
    Index n, const std::vector<std::pair<Index, Index>>& edges,
    const AdjacencyOptions& options = {});

}  // namespace srlpm
