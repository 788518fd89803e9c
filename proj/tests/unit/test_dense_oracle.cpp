#include "oracles.hpp"

#include "srlpm/dense_oracle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cstdlib>

using namespace srlpm;

TEST_CASE("off_part zeroes the diagonal only") {
  CHECK(off_part(Matrix::Identity(4, 4)).norm() == 0.0);
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  Matrix want(2, 2);
  want << 0, 2, 3, 0;
  const Matrix y = off_part(x);
  CHECK((y - want).norm() == 0.0);
  CHECK(x(0, 0) == 1.0);
  auto gen = oracle::rng(3);
  const Matrix r = oracle::random_matrix(7, 7, gen);
  CHECK((off_part(off_part(r)) - off_part(r)).norm() == 0.0);
  CHECK_THROWS_AS(off_part(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("one step from the identity on a shared in-neighbour") {
  const NormalizedAdjacency a = adjacency_from_pairs(3, {{2, 0}, {2, 1}});
  const Matrix s = fixed_point_step(Matrix::Identity(3, 3), a, 0.8);
  Matrix want = Matrix::Identity(3, 3);
  want(0, 1) = want(1, 0) = 0.8;
  CHECK((s - want).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("an edgeless graph maps everything to the identity") {
  const NormalizedAdjacency a = adjacency_from_pairs(5, {});
  auto gen = oracle::rng(1);
  const Matrix s = oracle::random_matrix(5, 5, gen);
  CHECK((fixed_point_step(s, a, 0.8) - Matrix::Identity(5, 5)).norm() == 0.0);
  CHECK_THROWS_AS(fixed_point_step(Matrix::Identity(4, 4), a, 0.8), DimensionError);
}

TEST_CASE("step agrees with the in-neighbour double sum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto gen = oracle::rng(seed);
    const Index n = 20;
    const auto edges = oracle::random_digraph(n, 0.12, gen);
    const NormalizedAdjacency a = adjacency_from_pairs(n, edges);
    Matrix s = oracle::random_matrix(n, n, gen);
    s = 0.5 * (s + s.transpose()).eval();
    const Matrix got = fixed_point_step(s, a, 0.8);
    const Matrix want = oracle::simrank_step_sum(s, n, edges, 0.8);
    CHECK(oracle::cheb(got - want) <= 1e-12);
  }
}

TEST_CASE("directed cycles have identity similarity") {
  for (Index n : {2, 3, 7, 20}) {
    const NormalizedAdjacency a = adjacency_from_pairs(n, oracle::directed_cycle(n));
    const DenseSimilarity s = solve_fixed_point(a);
    CHECK(s.converged);
    CHECK((s.values - Matrix::Identity(n, n)).norm() == 0.0);
  }
}

TEST_CASE("star graph: leaves share the hub") {
  const Index k = 6;
  std::vector<std::pair<Index, Index>> edges;
  for (Index leaf = 1; leaf <= k; ++leaf) edges.emplace_back(0, leaf);
  const NormalizedAdjacency a = adjacency_from_pairs(k + 1, edges);
  const DenseSimilarity s = solve_fixed_point(a);
  for (Index i = 1; i <= k; ++i) {
    CHECK(s.values(i, 0) == 0.0);
    for (Index j = 1; j <= k; ++j) {
      CHECK(s.values(i, j) == doctest::Approx(i == j ? 1.0 : 0.8).epsilon(1e-15));
    }
  }
}

TEST_CASE("iteration limit is reported, not thrown") {
  auto gen = oracle::rng(11);
  const NormalizedAdjacency a =
      adjacency_from_pairs(15, oracle::random_digraph(15, 0.3, gen));
  FixedPointOptions opts;
  opts.max_iter = 2;
  const DenseSimilarity s = solve_fixed_point(a, opts);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 2);
  CHECK(s.step_history.size() == 2);
}

TEST_CASE("converged similarity matches the plain dense loop and its invariants") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto gen = oracle::rng(50 + seed);
    const Index n = 25;
    const auto edges = oracle::random_digraph(n, 0.1, gen);
    const NormalizedAdjacency a = adjacency_from_pairs(n, edges);
    const DenseSimilarity s = solve_fixed_point(a);
    REQUIRE(s.converged);
    CHECK(s.residual_c <= 1e-12);
    const Matrix want = oracle::simrank_dense(oracle::dense_adjacency(n, edges), 0.8);
    CHECK(oracle::cheb(s.values - want) <= 1e-11);
    CHECK(oracle::cheb(s.values - s.values.transpose()) <= 1e-12);
    CHECK((s.values.diagonal().array() == 1.0).all());
    CHECK(s.values.minCoeff() >= 0.0);
    CHECK(oracle::cheb(off_part(s.values)) <= 0.8 + 1e-12);
  }
}

TEST_CASE("A^T S A never grows the Chebyshev norm") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto gen = oracle::rng(200 + seed);
    const Index n = 10 + static_cast<Index>(seed);
    const Matrix a = oracle::dense_adjacency(n, oracle::random_digraph(n, 0.15, gen));
    const Matrix s = oracle::random_matrix(n, n, gen);
    CHECK(oracle::cheb(a.transpose() * s * a) <= oracle::cheb(s) + 1e-12);
  }
}

TEST_CASE("steps contract, errors follow c^(k+1), iterates stay PSD") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto gen = oracle::rng(300 + seed);
    const Index n = 30;
    const NormalizedAdjacency a =
        adjacency_from_pairs(n, oracle::random_digraph(n, 0.1, gen));
    FixedPointOptions exact_opts;
    exact_opts.tol = 1e-14;
    exact_opts.max_iter = 5000;
    const Matrix exact = solve_fixed_point(a, exact_opts).values;

    std::vector<double> errors;
    double min_eig = 1.0;
    FixedPointOptions opts;
    opts.tol = 0.0;
    opts.max_iter = 20;
    opts.observer = [&](int, const Matrix& s) {
      errors.push_back(oracle::cheb(exact - s));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    };
    const DenseSimilarity s = solve_fixed_point(a, opts);
    REQUIRE(errors.size() == 21);
    for (std::size_t k = 0; k < errors.size(); ++k) {
      CHECK(errors[k] <= std::pow(0.8, static_cast<double>(k + 1)) + 1e-10);
    }
    for (std::size_t k = 1; k < s.step_history.size(); ++k) {
      CHECK(s.step_history[k] <= 0.8 * s.step_history[k - 1] + 1e-12);
    }
    CHECK(min_eig >= -1e-9);
  }
}

TEST_CASE("singular spectrum of simple matrices") {
  const Matrix i5 = Matrix::Identity(5, 5);
  CHECK(singular_spectrum(i5, true).norm() == 0.0);
  CHECK((singular_spectrum(i5, false).array() == 1.0).all());

  auto gen = oracle::rng(9);
  const Vector u = oracle::random_matrix(6, 1, gen);
  const Vector v = oracle::random_matrix(6, 1, gen);
  const Vector sigma = singular_spectrum(u * v.transpose(), false);
  CHECK(sigma(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
  CHECK(sigma.tail(5).cwiseAbs().maxCoeff() <= 1e-10);
  for (Index k = 1; k < sigma.size(); ++k) CHECK(sigma(k) <= sigma(k - 1));
}

TEST_CASE("truncated SVD error") {
  auto gen = oracle::rng(21);
  const Index n = 18;
  const NormalizedAdjacency a =
      adjacency_from_pairs(n, oracle::random_digraph(n, 0.2, gen));
  const Matrix s = solve_fixed_point(a).values;
  CHECK(truncated_svd_error(s, n) <= 1e-12);
  CHECK(truncated_svd_error(s, 0) == doctest::Approx(oracle::cheb(s - Matrix::Identity(n, n))));
  CHECK_THROWS_AS(truncated_svd_error(s, n + 1), DimensionError);

  Eigen::JacobiSVD<Matrix> svd(s - Matrix::Identity(n, n),
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  const std::vector<Index> ranks{1, 3, 6};
  const std::vector<double> errs = truncated_svd_errors(s, ranks);
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const Index r = ranks[i];
    const Matrix low = svd.matrixU().leftCols(r) *
                       svd.singularValues().head(r).asDiagonal() *
                       svd.matrixV().leftCols(r).transpose();
    CHECK(errs[i] == doctest::Approx(oracle::cheb(s - Matrix::Identity(n, n) - low)).epsilon(1e-9));
  }
}

TEST_CASE("dense cap refuses large n and honours the environment") {
  CHECK_NOTHROW(require_dense_allowed(100, "test", 100));
  CHECK_THROWS_AS(require_dense_allowed(101, "test", 100), CapacityError);
  ::setenv("SRLPM_DENSE_CAP", "50", 1);
  CHECK(dense_cap() == 50);
  const NormalizedAdjacency a = adjacency_from_pairs(60, oracle::directed_cycle(60));
  CHECK_THROWS_AS(solve_fixed_point(a), CapacityError);
  ::unsetenv("SRLPM_DENSE_CAP");
  CHECK(dense_cap() == kDefaultDenseCap);
}
