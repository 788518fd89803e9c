#include "srlpm/metrics.hpp"

#include "srlpm/dense_oracle.hpp"
#include "srlpm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace srlpm {

namespace {

double overlap(const SparseMatrix& a, Index i, Index j, const Vector& w) {
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  auto p = outer[i];
  auto q = outer[j];
  double sum = 0.0;
  while (p < outer[i + 1] && q < outer[j + 1]) {
    if (inner[p] < inner[q]) {
      ++p;
    } else if (inner[q] < inner[p]) {
      ++q;
    } else {
      sum += val[p] * val[q] * w(inner[p]);
      ++p;
      ++q;
    }
  }
  return sum;
}

double sparse_entry(const SparseMatrix& m, Index i, Index j) {
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const auto* first = inner + outer[j];
  const auto* last = inner + outer[j + 1];
  const auto* it = std::lower_bound(first, last, i);
  return (it != last && *it == i) ? m.valuePtr()[it - inner] : 0.0;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::pair:
      return "altmin";
    case FactorKind::symmetric:
      return "quadmin";
    case FactorKind::spectral:
      return "rsvd";
  }
  return "unknown";
}

Approximation::Approximation(FactorPair f)
    : kind_(FactorKind::pair), left_(std::move(f.u)), right_(std::move(f.v)) {
  detail::require_shape(left_.rows() == right_.rows() &&
                            left_.cols() == right_.cols(),
                        "FactorPair: U and V differ in shape");
}

Approximation::Approximation(SymmetricFactor f)
    : kind_(FactorKind::symmetric),
      left_(f.u),
      right_(std::move(f.u)),
      zero_diagonal_(true) {}

Approximation::Approximation(SpectralFactor f)
    : kind_(FactorKind::spectral),
      left_(f.left * f.sigma.asDiagonal()),
      right_(std::move(f.right)) {
  detail::require_shape(left_.rows() == right_.rows() &&
                            left_.cols() == right_.cols(),
                        "SpectralFactor: shapes differ");
}

Matrix Approximation::rows(Index begin, Index count) const {
  detail::require_shape(begin >= 0 && count >= 0 && begin + count <= n(),
                        "Approximation::rows: range out of bounds");
  Matrix block = left_.middleRows(begin, count) * right_.transpose();
  for (Index k = 0; k < count; ++k) {
    double& d = block(k, begin + k);
    d = zero_diagonal_ ? 1.0 : d + 1.0;
  }
  return block;
}

double Approximation::shift_entry(Index i, Index j) const {
  if (zero_diagonal_ && i == j) return 0.0;
  return left_.row(i).dot(right_.row(j));
}

double chebyshev_error(const Matrix& s_ref, const Approximation& approx,
                       Index block_rows) {
  const Index n = approx.n();
  detail::require_shape(s_ref.rows() == n && s_ref.cols() == n,
                        "chebyshev_error: reference is " +
                            detail::shape_str(s_ref.rows(), s_ref.cols()) +
                            ", approximation has n = " + std::to_string(n));
  double worst = 0.0;
  for (Index begin = 0; begin < n; begin += block_rows) {
    const Index count = std::min(block_rows, n - begin);
    const Matrix block = approx.rows(begin, count);
    worst = std::max(
        worst, (s_ref.middleRows(begin, count) - block).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Index> top_n_set(const Eigen::Ref<const Vector>& row, Index self,
                             Index top_n) {
  const Index n = row.size();
  if (top_n < 0 || top_n >= n) {
    throw std::invalid_argument("top_n_set: N = " + std::to_string(top_n) +
                                " must be below n = " + std::to_string(n));
  }
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    if (k != self) idx.push_back(k);
  }
  auto better = [&row](Index a, Index b) {
    return row(a) != row(b) ? row(a) > row(b) : a < b;
  };
  const auto cut = idx.begin() + top_n;
  std::nth_element(idx.begin(), cut, idx.end(), better);
  idx.resize(static_cast<std::size_t>(top_n));
  std::sort(idx.begin(), idx.end(), better);
  return idx;
}

std::map<Index, double> psi_many(const Matrix& s_ref,
                                 const Approximation& approx,
                                 const std::vector<Index>& top_ns,
                                 Index block_rows) {
  const Index n = approx.n();
  detail::require_shape(s_ref.rows() == n && s_ref.cols() == n,
                        "psi: reference is " +
                            detail::shape_str(s_ref.rows(), s_ref.cols()) +
                            ", approximation has n = " + std::to_string(n));
  for (Index top_n : top_ns) {
    if (top_n < 1 || top_n >= n) {
      throw std::invalid_argument("psi: N = " + std::to_string(top_n) +
                                  " must lie in [1, n - 1] with n = " +
                                  std::to_string(n));
    }
  }
  std::map<Index, std::int64_t> hits;
  for (Index top_n : top_ns) hits[top_n] = 0;

  Vector ref_row(n);
  Vector approx_row(n);
  for (Index begin = 0; begin < n; begin += block_rows) {
    const Index count = std::min(block_rows, n - begin);
    const Matrix block = approx.rows(begin, count);
    for (Index k = 0; k < count; ++k) {
      const Index i = begin + k;
      ref_row = s_ref.row(i).transpose();
      approx_row = block.row(k).transpose();
      for (auto& [top_n, count_hits] : hits) {
        std::vector<Index> a = top_n_set(ref_row, i, top_n);
        std::vector<Index> b = top_n_set(approx_row, i, top_n);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<Index> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(common));
        count_hits += static_cast<std::int64_t>(common.size());
      }
    }
  }
  std::map<Index, double> out;
  for (const auto& [top_n, count_hits] : hits) {
    out[top_n] = static_cast<double>(count_hits) /
                 (static_cast<double>(top_n) * static_cast<double>(n));
  }
  return out;
}

double psi(const Matrix& s_ref, const Approximation& approx, Index top_n) {
  return psi_many(s_ref, approx, {top_n}).at(top_n);
}

FrobeniusResidual frobenius_residual(const Approximation& approx,
                                     const NormalizedAdjacency& a,
                                     const ShiftMatrix& b, double c,
                                     const FrobeniusOptions& options) {
  const Index n = a.n();
  detail::require_shape(approx.n() == n && b.n() == n,
                        "frobenius_residual: size mismatch");
  bool dense = options.mode == FrobeniusOptions::Mode::dense;
  if (options.mode == FrobeniusOptions::Mode::automatic) dense = n <= dense_cap();

  FrobeniusResidual out;
  if (dense) {
    require_dense_allowed(n, "frobenius_residual (dense mode)");
    Matrix m = approx.left() * approx.right().transpose();
    if (approx.zero_diagonal()) m.diagonal().setZero();
    // A^T M A = A^T (A^T M^T)^T
    const Matrix inner = a.transposed() * (a.transposed() * m.transpose()).transpose();
    Matrix r = m - c * off_part(inner);
    r -= Matrix(b.mat);
    out.squared = r.squaredNorm();
    out.value = std::sqrt(out.squared);
    return out;
  }

  if (options.samples < 2) {
    throw std::invalid_argument("frobenius_residual: need at least 2 samples");
  }
  const Matrix at_left = a.transposed() * approx.left();
  const Matrix at_right = a.transposed() * approx.right();
  Vector g;
  if (approx.zero_diagonal()) {
    g = (approx.left().array() * approx.right().array()).rowwise().sum();
  }
  auto rng = make_rng(options.seed, 0x5A3D);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  double mean = 0.0;
  double m2 = 0.0;
  for (Index s = 0; s < options.samples; ++s) {
    const Index i = pick(rng);
    const Index j = pick(rng);
    double rij = approx.shift_entry(i, j);
    if (i != j) {
      double atma = at_left.row(i).dot(at_right.row(j));
      if (approx.zero_diagonal()) atma -= overlap(a.matrix(), i, j, g);
      rij -= c * atma + sparse_entry(b.mat, i, j);
    }
    // Welford update on the squared entry.
    const double x = rij * rij;
    const double delta = x - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (x - mean);
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  const double m = static_cast<double>(options.samples);
  out.sampled = true;
  out.samples = options.samples;
  out.squared = nn * mean;
  out.squared_standard_error = nn * std::sqrt(m2 / (m - 1.0) / m);
  out.value = std::sqrt(out.squared);
  return out;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json psi = nlohmann::json::object();
  for (const auto& [top_n, value] : report.psi) psi[std::to_string(top_n)] = value;
  nlohmann::json j = {
      {"dataset", report.dataset},
      {"solver", report.solver},
      {"rank", report.rank},
      {"c", report.c},
      {"chebyshev_error", report.chebyshev_error},
      {"psi", psi},
      {"wall_time_s", report.wall_time_s},
  };
  j["seed"] = report.seed ? nlohmann::json(*report.seed) : nlohmann::json();
  return j;
}

std::string csv_header(const EvalReport& report) {
  std::string h = "dataset,solver,rank,seed,c,chebyshev_error";
  for (const auto& [top_n, value] : report.psi) h += ",psi" + std::to_string(top_n);
  return h + ",wall_time_s";
}

std::string csv_row(const EvalReport& report) {
  std::string row = report.dataset + "," + report.solver + "," +
                    std::to_string(report.rank) + "," +
                    (report.seed ? std::to_string(*report.seed) : "") + "," +
                    format_double(report.c) + "," +
                    format_double(report.chebyshev_error);
  for (const auto& [top_n, value] : report.psi) row += "," + format_double(value);
  return row + "," + format_double(report.wall_time_s);
}

}  // namespace srlpm
