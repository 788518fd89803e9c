#include "oracles.hpp"

#include "srlpm/linalg.hpp"
#include "srlpm/metrics.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace srlpm;

namespace {

Approximation pair_of(const Matrix& u, const Matrix& v) { return Approximation(FactorPair{u, v}); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

std::set<Index> as_set(const std::vector<Index>& xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("Chebyshev error of exact and shifted factors") {
  const Index n = 6;
  auto gen = oracle::rng(1);
  const Matrix u = oracle::random_matrix(n, 2, gen);
  const Matrix v = oracle::random_matrix(n, 2, gen);
  const Matrix s = Matrix::Identity(n, n) + u * v.transpose();
  CHECK(chebyshev_error(s, pair_of(u, v)) == 0.0);

  Matrix bumped = s;
  bumped(2, 4) += 0.25;
  CHECK(chebyshev_error(bumped, pair_of(u, v)) == doctest::Approx(0.25).epsilon(1e-12));

  const Matrix z = Matrix::Zero(n, 1);
  CHECK(chebyshev_error(Matrix::Identity(n, n), pair_of(z, z)) == 0.0);
  CHECK_THROWS_AS(chebyshev_error(Matrix::Identity(n + 1, n + 1), pair_of(z, z)),
                  DimensionError);
}

TEST_CASE("Chebyshev error matches the dense difference for any block size") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto gen = oracle::rng(10 + seed);
    const Index n = 30;
    const Matrix ref = oracle::random_matrix(n, n, gen);
    const Matrix u = oracle::random_matrix(n, 4, gen);
    const Matrix v = oracle::random_matrix(n, 4, gen);
    const double want =
        oracle::cheb(ref - Matrix::Identity(n, n) - u * v.transpose());
    for (Index block : {1, 7, 30, 256}) {
      CHECK(std::abs(chebyshev_error(ref, pair_of(u, v), block) - want) <= 1e-14);
    }
  }
}

TEST_CASE("top-N excludes self and breaks ties by index") {
  CHECK(top_n_set(vec({1.0, 0.8, 0.2, 0.2}), 0, 1) == std::vector<Index>{1});
  CHECK(as_set(top_n_set(vec({1.0, 0.5, 0.5, 0.0}), 0, 2)) == std::set<Index>{1, 2});
  CHECK(top_n_set(vec({1.0, 0.8, 0.2, 0.2}), 0, 2) == std::vector<Index>{1, 2});
  CHECK(top_n_set(vec({0.3, 0.3, 0.3, 0.3}), 2, 2) == std::vector<Index>{0, 1});
  CHECK(top_n_set(vec({0.0, 0.9, 1.0}), 2, 1) == std::vector<Index>{1});
  CHECK_THROWS_AS(top_n_set(vec({1.0, 0.5, 0.2}), 0, 3), std::invalid_argument);
}

TEST_CASE("top-N agrees with the brute-force selection") {
  auto gen = oracle::rng(3);
  std::uniform_int_distribution<int> level(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 5 + trial % 20;
    Vector row(n);
    // Coarse levels force plenty of ties.
    for (Index k = 0; k < n; ++k) row(k) = 0.1 * level(gen);
    const Index self = trial % n;
    const Index top = 1 + trial % (n - 1);
    CHECK(top_n_set(row, self, top) == oracle::top_n(row, self, top));
  }
}

TEST_CASE("Psi is 1 for identical rankings and matches the brute force") {
  const Index n = 20;
  auto gen = oracle::rng(4);
  const Matrix u = oracle::random_matrix(n, 3, gen);
  const Matrix v = oracle::random_matrix(n, 3, gen);
  const Matrix s = Matrix::Identity(n, n) + u * v.transpose();
  for (Index top : {1, 5, 19}) CHECK(psi(s, pair_of(u, v), top) == 1.0);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = oracle::rng(40 + seed);
    const Matrix ref = oracle::random_matrix(n, n, g);
    const Matrix x = oracle::random_matrix(n, 2, g);
    const Matrix y = oracle::random_matrix(n, 2, g);
    const Matrix approx = Matrix::Identity(n, n) + x * y.transpose();
    const auto many = psi_many(ref, pair_of(x, y), {1, 3, 10}, 6);
    for (Index top : {1, 3, 10}) {
      const double want = oracle::psi(ref, approx, top);
      CHECK(many.at(top) == doctest::Approx(want).epsilon(1e-15));
      CHECK(many.at(top) >= 0.0);
      CHECK(many.at(top) <= 1.0);
    }
    // Positive rescaling of the reference keeps every ranking.
    CHECK(psi(3.0 * ref, pair_of(x, y), 3) == many.at(3));
  }
}

TEST_CASE("Psi against the identity reference") {
  const Index n = 12;
  auto gen = oracle::rng(5);
  const Matrix u = oracle::random_matrix(n, 2, gen);
  const Matrix v = oracle::random_matrix(n, 2, gen);
  const Matrix approx = Matrix::Identity(n, n) + u * v.transpose();
  const Matrix id = Matrix::Identity(n, n);
  CHECK(psi(id, pair_of(u, v), 4) == doctest::Approx(oracle::psi(id, approx, 4)));
}

TEST_CASE("Psi rejects N outside [1, n - 1]") {
  const Matrix z = Matrix::Zero(8, 1);
  const Matrix id = Matrix::Identity(8, 8);
  CHECK_THROWS_AS(psi(id, pair_of(z, z), 0), std::invalid_argument);
  CHECK_THROWS_AS(psi(id, pair_of(z, z), 8), std::invalid_argument);
  CHECK_NOTHROW(psi(id, pair_of(z, z), 7));
}

TEST_CASE("symmetric and spectral factors expand to the right rows") {
  auto gen = oracle::rng(6);
  const Index n = 9;
  const Matrix u = oracle::random_matrix(n, 3, gen);
  const Approximation sym{SymmetricFactor{u}};
  Matrix want = oracle::off(u * u.transpose());
  want.diagonal().setOnes();
  CHECK(oracle::cheb(sym.rows(0, n) - want) <= 1e-15);
  CHECK(oracle::cheb(sym.rows(4, 3) - want.middleRows(4, 3)) <= 1e-15);
  CHECK(sym.shift_entry(2, 2) == 0.0);
  CHECK(sym.kind() == FactorKind::symmetric);

  SpectralFactor m;
  m.left = orthonormal_basis(oracle::random_matrix(n, 3, gen));
  m.right = orthonormal_basis(oracle::random_matrix(n, 3, gen));
  m.sigma = vec({3.0, 2.0, 0.5});
  const Matrix dense = Matrix::Identity(n, n) + m.left * m.sigma.asDiagonal() * m.right.transpose();
  const Approximation spectral{m};
  CHECK(oracle::cheb(spectral.rows(0, n) - dense) <= 1e-14);
  CHECK(spectral.rank() == 3);
  CHECK(to_string(spectral.kind()) == "rsvd");
  CHECK(to_string(sym.kind()) == "quadmin");
  CHECK(to_string(FactorKind::pair) == "altmin");
}

TEST_CASE("Frobenius residual: exact cases and dense agreement") {
  const NormalizedAdjacency cycle = adjacency_from_pairs(10, oracle::directed_cycle(10));
  const ShiftMatrix cb = build_shift(cycle, 0.8);
  const Matrix z = Matrix::Zero(10, 2);
  CHECK(frobenius_residual(pair_of(z, z), cycle, cb, 0.8).value == 0.0);

  auto gen = oracle::rng(7);
  const Index n = 25;
  const auto edges = oracle::random_digraph(n, 0.15, gen);
  const NormalizedAdjacency a = adjacency_from_pairs(n, edges);
  const Matrix da = oracle::dense_adjacency(n, edges);
  const ShiftMatrix b = build_shift(a, 0.8);
  const Matrix zn = Matrix::Zero(n, 3);
  CHECK(frobenius_residual(pair_of(zn, zn), a, b, 0.8).value ==
        doctest::Approx(Matrix(b.mat).norm()).epsilon(1e-14));

  const Matrix u = oracle::random_matrix(n, 3, gen);
  const Matrix v = oracle::random_matrix(n, 3, gen);
  CHECK(frobenius_residual(pair_of(u, v), a, b, 0.8).value ==
        doctest::Approx(oracle::frobenius_residual(u * v.transpose(), da, 0.8)).epsilon(1e-12));
  const Matrix uu = oracle::off(u * u.transpose());
  CHECK(frobenius_residual(Approximation(SymmetricFactor{u}), a, b, 0.8).value ==
        doctest::Approx(oracle::frobenius_residual(uu, da, 0.8)).epsilon(1e-12));
}

TEST_CASE("sampled Frobenius residual brackets the exact value") {
  int inside = 0;
  const int trials = 10;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    auto gen = oracle::rng(70 + seed);
    const Index n = 40;
    const auto edges = oracle::random_digraph(n, 0.1, gen);
    const NormalizedAdjacency a = adjacency_from_pairs(n, edges);
    const ShiftMatrix b = build_shift(a, 0.8);
    const Matrix u = oracle::random_matrix(n, 3, gen) / 3.0;
    const Matrix v = oracle::random_matrix(n, 3, gen) / 3.0;
    for (const Approximation& approx :
         {pair_of(u, v), Approximation(SymmetricFactor{u})}) {
      FrobeniusOptions dense_opts;
      dense_opts.mode = FrobeniusOptions::Mode::dense;
      const double exact = frobenius_residual(approx, a, b, 0.8, dense_opts).squared;
      FrobeniusOptions opts;
      opts.mode = FrobeniusOptions::Mode::sampled;
      opts.samples = 20000;
      opts.seed = seed;
      const FrobeniusResidual est = frobenius_residual(approx, a, b, 0.8, opts);
      REQUIRE(est.sampled);
      REQUIRE(est.squared_standard_error);
      if (std::abs(est.squared - exact) <= 3.0 * *est.squared_standard_error) ++inside;
    }
  }
  // Three standard errors cover ~99.7%; allow one miss in twenty.
  CHECK(inside >= 2 * trials - 1);
}

TEST_CASE("report serializes to JSON and CSV") {
  EvalReport r;
  r.dataset = "toy";
  r.solver = "altmin";
  r.rank = 5;
  r.seed = 7;
  r.chebyshev_error = 0.125;
  r.psi = {{10, 0.5}, {50, 0.75}};
  r.wall_time_s = 1.5;
  const nlohmann::json j = to_json(r);
  for (const char* key : {"dataset", "solver", "rank", "seed", "c", "chebyshev_error", "psi",
                          "wall_time_s"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["psi"]["10"].get<double>() == 0.5);
  CHECK(j["seed"].get<int>() == 7);
  CHECK(csv_header(r) == "dataset,solver,rank,seed,c,chebyshev_error,psi10,psi50,wall_time_s");
  CHECK(csv_row(r) == "toy,altmin,5,7,0.80000000000000004,0.125,0.5,0.75,1.5");
  r.seed.reset();
  CHECK(to_json(r)["seed"].is_null());
}
