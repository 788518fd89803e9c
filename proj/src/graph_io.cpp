#include "srlpm/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

namespace srlpm {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<Index, Index>& p) const noexcept {
    auto a = static_cast<std::uint64_t>(p.first);
    auto b = static_cast<std::uint64_t>(p.second);
    return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ULL ^ b);
  }
};

bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f';
}

// Returns false if the next token is missing or not a non-negative integer.
bool next_uint(std::string_view& rest, std::uint64_t& value) {
  std::size_t i = 0;
  while (i < rest.size() && is_space(rest[i])) ++i;
  std::size_t j = i;
  while (j < rest.size() && !is_space(rest[j])) ++j;
  if (i == j) return false;
  const char* first = rest.data() + i;
  const char* last = rest.data() + j;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return false;
  rest.remove_prefix(j);
  return true;
}

Index intern(EdgeList& el, std::uint64_t raw) {
  auto [it, inserted] = el.index_of.try_emplace(raw, el.node_count());
  if (inserted) el.raw_ids.push_back(raw);
  return it->second;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in) {
  EdgeList el;
  std::unordered_set<std::pair<Index, Index>, PairHash> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    std::size_t first = 0;
    while (first < view.size() && is_space(view[first])) ++first;
    if (first == view.size() || view[first] == '#') continue;

    std::uint64_t src = 0;
    std::uint64_t dst = 0;
    if (!next_uint(view, src) || !next_uint(view, dst)) {
      throw ParseError("edge list line " + std::to_string(line_no) +
                       ": expected two non-negative integer node ids");
    }
    const Index s = intern(el, src);
    const Index d = intern(el, dst);
    if (seen.emplace(s, d).second) el.edges.emplace_back(s, d);
  }
  if (in.bad()) throw ParseError("edge list: stream read failure");
  return el;
}

EdgeList read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

NormalizedAdjacency::NormalizedAdjacency(SparseMatrix matrix,
                                         std::vector<Index> col_degree)
    : matrix_(std::move(matrix)), col_degree_(std::move(col_degree)) {
  detail::require_shape(matrix_.rows() == matrix_.cols(),
                        "adjacency must be square");
  matrix_.makeCompressed();
  transposed_ = matrix_.transpose();
  transposed_.makeCompressed();
  detail::require_shape(
      static_cast<Index>(col_degree_.size()) == matrix_.cols(),
      "adjacency degree vector length mismatch");
}

NormalizedAdjacency build_adjacency(const EdgeList& el,
                                    const AdjacencyOptions& options) {
  const Index n = el.node_count();
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(el.edges.size() * (options.symmetrize ? 2 : 1));
  for (const auto& [s, d] : el.edges) {
    if (s < 0 || s >= n || d < 0 || d >= n) {
      throw DimensionError("edge endpoint outside [0, n)");
    }
    if (options.drop_self_loops && s == d) continue;
    edges.emplace_back(s, d);
    if (options.symmetrize && s != d) edges.emplace_back(d, s);
  }
  // Sorting by (dst, src) gives CSC order directly.
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<Index> degree(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges) ++degree[static_cast<std::size_t>(e.second)];

  SparseMatrix a(n, n);
  a.reserve(static_cast<Index>(edges.size()));
  for (Index j = 0, e = 0; j < n; ++j) {
    a.startVec(j);
    const double w =
        degree[static_cast<std::size_t>(j)] > 0
            ? 1.0 / static_cast<double>(degree[static_cast<std::size_t>(j)])
            : 0.0;
    for (; e < static_cast<Index>(edges.size()) &&
           edges[static_cast<std::size_t>(e)].second == j;
         ++e) {
      a.insertBack(edges[static_cast<std::size_t>(e)].first, j) = w;
    }
  }
  a.finalize();
  return NormalizedAdjacency(std::move(a), std::move(degree));
}

NormalizedAdjacency adjacency_from_pairs(
    Index n, const std::vector<std::pair<Index, Index>>& edges,
    const AdjacencyOptions& options) {
  EdgeList el;
  el.raw_ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    el.raw_ids.push_back(static_cast<std::uint64_t>(i));
    el.index_of.emplace(static_cast<std::uint64_t>(i), i);
  }
  el.edges = edges;
  return build_adjacency(el, options);
}

}  // namespace srlpm
