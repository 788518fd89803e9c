#include "srlpm/kernels.hpp"

#include <cstdlib>
#include <string>

namespace srlpm {

namespace {

void require_nnz_within(Index bound, Index cap, const std::string& what) {
  if (bound > cap) {
    throw CapacityError(what + ": sparse product may hold up to " +
                        std::to_string(bound) + " nonzeros, cap is " +
                        std::to_string(cap) +
                        " (set SRLPM_SPARSE_CAP to raise it)");
  }
}

SparseMatrix without_diagonal(const SparseMatrix& x) {
  SparseMatrix y = x;
  y.prune([](Index row, Index col, double) { return row != col; });
  y.makeCompressed();
  return y;
}

SparseMatrix guarded_product(const SparseMatrix& x, const SparseMatrix& y,
                             Index cap, const std::string& what) {
  require_nnz_within(product_nnz_bound(x, y), cap, what);
  SparseMatrix p = x * y;
  p.makeCompressed();
  return p;
}

// sum_k A(k, i) A(k, j) w(k): merge of two sorted columns of A.
double column_overlap(const SparseMatrix& a, Index i, Index j,
                      const Vector& w) {
  const auto* outer = a.outerIndexPtr();
  const auto* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  auto p = outer[i];
  auto q = outer[j];
  const auto pe = outer[i + 1];
  const auto qe = outer[j + 1];
  double sum = 0.0;
  while (p < pe && q < qe) {
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

}  // namespace

Index sparse_cap() {
  if (const char* env = std::getenv("SRLPM_SPARSE_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<Index>(v);
  }
  return kDefaultSparseCap;
}

Index product_nnz_bound(const SparseMatrix& x, const SparseMatrix& y) {
  detail::require_shape(x.cols() == y.rows(),
                        "sparse product: inner dimensions differ");
  std::vector<Index> row_count(static_cast<std::size_t>(y.rows()), 0);
  for (Index j = 0; j < y.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(y, j); it; ++it) {
      ++row_count[static_cast<std::size_t>(it.row())];
    }
  }
  Index bound = 0;
  for (Index k = 0; k < x.outerSize(); ++k) {
    const Index col_nnz = x.outerIndexPtr()[k + 1] - x.outerIndexPtr()[k];
    bound += col_nnz * row_count[static_cast<std::size_t>(k)];
  }
  return bound;
}

ShiftMatrix build_shift(const NormalizedAdjacency& a, double c,
                        Index nnz_cap) {
  SparseMatrix ata =
      guarded_product(a.transposed(), a.matrix(), nnz_cap, "build_shift");
  ShiftMatrix b;
  b.c = c;
  b.mat = without_diagonal(ata) * c;
  b.mat.makeCompressed();
  return b;
}

Vector bilinear_diag(const Matrix& p, const Matrix& q) {
  detail::require_shape(
      p.cols() == q.rows() && p.rows() == q.cols(),
      "bilinear_diag: P is " + detail::shape_str(p.rows(), p.cols()) +
          ", Q is " + detail::shape_str(q.rows(), q.cols()));
  Vector d(p.rows());
  for (Index k = 0; k < p.rows(); ++k) d(k) = p.row(k).dot(q.col(k));
  return d;
}

Matrix dmmp(const Matrix& x, const Matrix& y, const Matrix& z) {
  detail::require_shape(z.rows() == x.rows(),
                        "dmmp: Z has " + std::to_string(z.rows()) +
                            " rows, expected " + std::to_string(x.rows()));
  return bilinear_diag(x, y).asDiagonal() * z;
}

SparseMatrix apply_phi_star_sparse(const SparseMatrix& w,
                                   const NormalizedAdjacency& a, double c,
                                   Index nnz_cap) {
  detail::require_shape(w.rows() == a.n() && w.cols() == a.n(),
                        "apply_phi_star_sparse: W is " +
                            detail::shape_str(w.rows(), w.cols()));
  const SparseMatrix off_w = without_diagonal(w);
  const SparseMatrix left =
      guarded_product(a.matrix(), off_w, nnz_cap, "apply_phi_star_sparse");
  const SparseMatrix inner =
      guarded_product(left, a.transposed(), nnz_cap, "apply_phi_star_sparse");
  SparseMatrix out = off_w - c * without_diagonal(inner);
  out.makeCompressed();
  return out;
}

PhiOperator::PhiOperator(const NormalizedAdjacency& a, double c,
                         Index nnz_cap)
    : a_(&a), c_(c) {
  a_squared_ = a.matrix().cwiseProduct(a.matrix());
  a_squared_t_ = a_squared_.transpose();
  SparseMatrix aat =
      guarded_product(a.matrix(), a.transposed(), nnz_cap, "PhiOperator");
  coupling_squared_ = aat.cwiseProduct(aat);
  coupling_squared_.makeCompressed();
}

PhiImage PhiOperator::phi(Matrix left, Matrix right) const {
  return PhiImage(*this, std::move(left), std::move(right));
}

PhiImage::PhiImage(const PhiOperator& op, Matrix left, Matrix right)
    : op_(&op), left_(std::move(left)), right_(std::move(right)) {
  const Index n = op.n();
  detail::require_shape(
      left_.rows() == n && right_.rows() == n && left_.cols() == right_.cols(),
      "Phi: factors are " + detail::shape_str(left_.rows(), left_.cols()) +
          " and " + detail::shape_str(right_.rows(), right_.cols()) +
          ", n = " + std::to_string(n));
  const SparseMatrix& at = op.adjacency().transposed();
  at_left_ = at * left_;
  at_right_ = at * right_;
  g_ = (left_.array() * right_.array()).rowwise().sum();
  h_ = (at_left_.array() * at_right_.array()).rowwise().sum().matrix() -
       op.squared_entries_t() * g_;
}

Matrix PhiImage::apply(const Matrix& w) const {
  detail::require_shape(w.rows() == op_->n(),
                        "Phi apply: operand has " + std::to_string(w.rows()) +
                            " rows, expected " + std::to_string(op_->n()));
  const double c = op_->c();
  const SparseMatrix& a = op_->adjacency().matrix();
  const SparseMatrix& at = op_->adjacency().transposed();
  Matrix out = left_ * (right_.transpose() * w);
  out.noalias() -= c * (at_left_ * (at_right_.transpose() * w));
  Matrix aw = a * w;
  aw = g_.asDiagonal() * aw;
  out.noalias() += c * (at * aw);
  out += ((c * h_ - g_).asDiagonal() * w);
  return out;
}

Vector PhiImage::outer_diagonal() const {
  const double c = op_->c();
  const SparseMatrix& a = op_->adjacency().matrix();
  const Matrix a_left = a * left_;
  const Matrix a_right = a * right_;
  const Matrix aat_left = a * at_left_;
  const Matrix aat_right = a * at_right_;
  Vector d = (a_left.array() * a_right.array()).rowwise().sum();
  d -= op_->squared_entries() * g_;
  d -= c * (aat_left.array() * aat_right.array()).rowwise().sum().matrix();
  d += c * (op_->coupling_squared() * g_);
  d += c * (op_->squared_entries() * h_);
  return d;
}

double PhiImage::entry(Index i, Index j) const {
  if (i == j) return 0.0;
  const double c = op_->c();
  return left_.row(i).dot(right_.row(j)) -
         c * at_left_.row(i).dot(at_right_.row(j)) +
         c * column_overlap(op_->adjacency().matrix(), i, j, g_);
}

Matrix PhiOperator::phi_star_phi(const Matrix& left, const Matrix& right,
                                 const Matrix& z) const {
  detail::require_shape(z.rows() == n(),
                        "ffmp: Z has " + std::to_string(z.rows()) +
                            " rows, expected " + std::to_string(n()));
  // With P = Phi(X Y^T) (zero diagonal) and K = A P A^T:
  //   Phi*(P) Z = P Z - c (K Z - diag(K) Z).
  const PhiImage p(*this, left, right);
  const SparseMatrix& a = a_->matrix();
  const SparseMatrix& at = a_->transposed();
  Matrix out = p.apply(z);
  Matrix kz = a * p.apply(at * z);
  kz -= p.outer_diagonal().asDiagonal() * z;
  out.noalias() -= c_ * kz;
  return out;
}

Matrix ffmp(const PhiOperator& op, const Matrix& x, const Matrix& y,
            const Matrix& z) {
  detail::require_shape(
      x.cols() == y.rows() && x.rows() == y.cols(),
      "ffmp: X is " + detail::shape_str(x.rows(), x.cols()) + ", Y is " +
          detail::shape_str(y.rows(), y.cols()));
  return op.phi_star_phi(x, y.transpose(), z);
}

}  // namespace srlpm
