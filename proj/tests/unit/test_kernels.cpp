#include "oracles.hpp"

#include "srlpm/kernels.hpp"

#include <doctest.h>

using namespace srlpm;

namespace {

struct Instance {
  Index n;
  oracle::Edges edges;
  NormalizedAdjacency a;
  Matrix dense_a;
};

Instance make_instance(std::uint64_t seed, Index n, double p = 0.15) {
  auto gen = oracle::rng(seed);
  Instance inst{n, oracle::random_digraph(n, p, gen), {}, {}};
  inst.a = adjacency_from_pairs(n, inst.edges);
  inst.dense_a = oracle::dense_adjacency(n, inst.edges);
  return inst;
}

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(); }

}  // namespace

TEST_CASE("shift matrix: examples") {
  const NormalizedAdjacency cycle = adjacency_from_pairs(6, oracle::directed_cycle(6));
  CHECK(build_shift(cycle, 0.8).mat.nonZeros() == 0);

  const NormalizedAdjacency a = adjacency_from_pairs(3, {{2, 0}, {2, 1}});
  const Matrix b = Matrix(build_shift(a, 0.8).mat);
  Matrix want = Matrix::Zero(3, 3);
  want(0, 1) = want(1, 0) = 0.8;
  CHECK((b - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("shift matrix matches c off(A^T A) and its invariants") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = make_instance(seed, 10 + static_cast<Index>(seed));
    const ShiftMatrix b = build_shift(inst.a, 0.8);
    const Matrix d(b.mat);
    CHECK(oracle::cheb(d - oracle::shift(inst.dense_a, 0.8)) <= 1e-12);
    CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(oracle::cheb(d - d.transpose()) <= 1e-15);
    CHECK(d.minCoeff() >= 0.0);
    CHECK(d.maxCoeff() <= 0.8 + 1e-15);
  }
}

TEST_CASE("sparse fill guard refuses oversized products") {
  const Instance inst = make_instance(4, 30, 0.3);
  CHECK_THROWS_AS(build_shift(inst.a, 0.8, 10), CapacityError);
  CHECK_THROWS_AS(apply_phi_star_sparse(build_shift(inst.a, 0.8).mat, inst.a, 0.8, 10),
                  CapacityError);
  CHECK_THROWS_AS(PhiOperator(inst.a, 0.8, 10), CapacityError);
}

TEST_CASE("bilinear_diag") {
  CHECK((bilinear_diag(Matrix::Identity(4, 4), Matrix::Identity(4, 4)).array() == 1.0).all());
  auto gen = oracle::rng(5);
  const Matrix p = oracle::random_matrix(30, 5, gen);
  const Matrix q = oracle::random_matrix(5, 30, gen);
  CHECK((bilinear_diag(p, q) - (p * q).diagonal()).cwiseAbs().maxCoeff() <= 1e-12);
  Matrix e(2, 2);
  e << 1, 2, 0, 0;
  Matrix f(2, 2);
  f << 3, 0, 4, 0;
  CHECK((bilinear_diag(e, f) - (e * f).diagonal()).norm() == 0.0);
  CHECK_THROWS_AS(bilinear_diag(p, p), DimensionError);
}

TEST_CASE("dmmp") {
  Matrix x(2, 2);
  x << 1, 0, 0, 2;
  const Matrix z = Matrix::Ones(2, 2);
  Matrix want(2, 2);
  want << 1, 1, 2, 2;
  CHECK((dmmp(x, Matrix::Identity(2, 2), z) - want).norm() == 0.0);

  auto gen = oracle::rng(6);
  const Matrix xr = oracle::random_matrix(20, 3, gen);
  const Matrix yr = oracle::random_matrix(3, 20, gen);
  const Matrix zr = oracle::random_matrix(20, 4, gen);
  CHECK(dmmp(Matrix::Zero(20, 3), yr, zr).norm() == 0.0);
  CHECK(dmmp(xr, Matrix::Zero(3, 20), zr).norm() == 0.0);
  CHECK(oracle::cheb(dmmp(xr, yr, zr) - oracle::dmmp(xr, yr, zr)) <= 1e-12);
  CHECK_THROWS_AS(dmmp(xr, yr, Matrix::Zero(19, 4)), DimensionError);
}

TEST_CASE("Phi of a diagonal matrix vanishes") {
  const Instance inst = make_instance(8, 15);
  const PhiOperator op(inst.a, 0.8);
  auto gen = oracle::rng(8);
  const Vector d = oracle::random_matrix(15, 1, gen);
  const PhiImage img = op.phi(Matrix(d.asDiagonal()), Matrix::Identity(15, 15));
  const Matrix z = oracle::random_matrix(15, 3, gen);
  CHECK(img.apply(z).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("Phi with c = 0 is the off-diagonal part") {
  const Instance inst = make_instance(9, 15);
  const PhiOperator op(inst.a, 0.0);
  auto gen = oracle::rng(9);
  const Matrix x = oracle::random_matrix(15, 3, gen);
  const Matrix y = oracle::random_matrix(15, 3, gen);
  const Matrix z = oracle::random_matrix(15, 2, gen);
  const Matrix want = oracle::off(x * y.transpose()) * z;
  CHECK(oracle::rel_err(op.phi(x, y).apply(z), want) <= 1e-13);
}

TEST_CASE("implicit Phi matches dense evaluation") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Index n = 8 + static_cast<Index>(seed);
    const Instance inst = make_instance(1000 + seed, n);
    const double c = 0.8;
    const PhiOperator op(inst.a, c);
    auto gen = oracle::rng(seed);
    const Index k = 1 + static_cast<Index>(seed % 4);
    const Matrix x = oracle::random_matrix(n, k, gen);
    const Matrix y = oracle::random_matrix(n, k, gen);
    const Matrix z = oracle::random_matrix(n, 3, gen);
    const PhiImage img = op.phi(x, y);
    const Matrix dense = oracle::phi(x * y.transpose(), inst.dense_a, c);
    CHECK(oracle::rel_err(img.apply(z), dense * z) <= 1e-10);

    const Matrix outer = inst.dense_a * dense * inst.dense_a.transpose();
    CHECK(oracle::rel_err(img.outer_diagonal(), outer.diagonal()) <= 1e-10);
    for (Index i = 0; i < n; i += 3) {
      for (Index j = 0; j < n; j += 2) {
        CHECK(img.entry(i, j) == doctest::Approx(dense(i, j)).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("ffmp examples") {
  const Instance inst = make_instance(12, 20);
  auto gen = oracle::rng(12);
  const Matrix x = oracle::random_matrix(20, 3, gen);
  const Matrix y = oracle::random_matrix(3, 20, gen);
  const Matrix z = oracle::random_matrix(20, 4, gen);
  const PhiOperator op(inst.a, 0.8);
  CHECK(ffmp(op, Matrix::Zero(20, 3), y, z).norm() == 0.0);
  CHECK(ffmp(op, x, Matrix::Zero(3, 20), z).norm() == 0.0);

  const PhiOperator op0(inst.a, 0.0);
  const Matrix want = x * (y * z) - oracle::dmmp(x, y, z);
  CHECK(oracle::rel_err(ffmp(op0, x, y, z), want) <= 1e-13);
  CHECK_THROWS_AS(ffmp(op, x, x.transpose().topRows(2), z), DimensionError);
}

TEST_CASE("ffmp matches dense Phi*(Phi(XY))Z on random instances") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Index n = 5 + static_cast<Index>((seed * 7) % 36);  // up to 40
    const Instance inst = make_instance(2000 + seed, n, 0.05 + 0.01 * static_cast<double>(seed % 10));
    const double c = seed % 3 == 0 ? 0.6 : 0.8;
    const PhiOperator op(inst.a, c);
    auto gen = oracle::rng(seed + 77);
    const Index k = 1 + static_cast<Index>(seed % 5);
    const Index m = 1 + static_cast<Index>(seed % 4);
    const Matrix x = oracle::random_matrix(n, k, gen);
    const Matrix y = oracle::random_matrix(k, n, gen);
    const Matrix z = oracle::random_matrix(n, m, gen);
    const Matrix want = oracle::ffmp(x, y, z, inst.dense_a, c);
    CHECK(oracle::rel_err(ffmp(op, x, y, z), want) <= 1e-9);
  }
  // The worked size from the kernel description.
  const Instance inst = make_instance(25, 25);
  const PhiOperator op(inst.a, 0.8);
  auto gen = oracle::rng(25);
  const Matrix x = oracle::random_matrix(25, 3, gen);
  const Matrix y = oracle::random_matrix(3, 25, gen);
  const Matrix z = oracle::random_matrix(25, 4, gen);
  CHECK(oracle::rel_err(ffmp(op, x, y, z), oracle::ffmp(x, y, z, inst.dense_a, 0.8)) <= 1e-10);
}

TEST_CASE("ffmp is linear in Z") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = make_instance(3000 + seed, 20);
    const PhiOperator op(inst.a, 0.8);
    auto gen = oracle::rng(seed);
    const Matrix x = oracle::random_matrix(20, 2, gen);
    const Matrix y = oracle::random_matrix(2, 20, gen);
    const Matrix z1 = oracle::random_matrix(20, 3, gen);
    const Matrix z2 = oracle::random_matrix(20, 3, gen);
    const double alpha = -1.7 + 0.3 * static_cast<double>(seed);
    const Matrix lhs = ffmp(op, x, y, alpha * z1 + z2);
    const Matrix rhs = alpha * ffmp(op, x, y, z1) + ffmp(op, x, y, z2);
    CHECK(oracle::cheb(lhs - rhs) <= 1e-10 * std::max(1.0, oracle::cheb(rhs)));
  }
}

TEST_CASE("sparse Phi*: examples and dense agreement") {
  const Instance inst = make_instance(14, 18);
  const SparseMatrix zero(18, 18);
  CHECK(apply_phi_star_sparse(zero, inst.a, 0.8).nonZeros() == 0);
  auto gen = oracle::rng(14);
  const Matrix diag = Matrix(oracle::random_matrix(18, 1, gen).asDiagonal());
  CHECK(Matrix(apply_phi_star_sparse(to_sparse(diag), inst.a, 0.8)).norm() == 0.0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance g = make_instance(4000 + seed, 10 + static_cast<Index>(seed));
    const ShiftMatrix b = build_shift(g.a, 0.8);
    const Matrix got(apply_phi_star_sparse(b.mat, g.a, 0.8));
    const Matrix want = oracle::phi_star(oracle::shift(g.dense_a, 0.8), g.dense_a, 0.8);
    CHECK(oracle::cheb(got - want) <= 1e-12);
  }
}

TEST_CASE("Phi* is the Frobenius adjoint of Phi") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Index n = 6 + static_cast<Index>(seed);
    const Instance inst = make_instance(5000 + seed, n);
    const double c = 0.8;
    const PhiOperator op(inst.a, c);
    auto gen = oracle::rng(seed);
    // A general X as P I^T with a square P.
    const Matrix x = oracle::random_matrix(n, n, gen);
    const Matrix y = oracle::random_matrix(n, n, gen);
    const Matrix phi_x = op.phi(x, Matrix::Identity(n, n)).apply(Matrix::Identity(n, n));
    const Matrix phi_star_y(apply_phi_star_sparse(to_sparse(y), inst.a, c));
    const double lhs = (phi_x.array() * y.array()).sum();
    const double rhs = (x.array() * phi_star_y.array()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-10);
  }
}
