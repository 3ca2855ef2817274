#include <doctest.h>

#include <set>

#include "ssc/error.hpp"
#include "ssc/random.hpp"
#include "ssc/types.hpp"

using namespace ssc;

TEST_CASE("trajectory validates indices and counts transitions") {
  Trajectory t({0, 1, 1, 2}, 3);
  CHECK(t.length() == 4);
  CHECK(t.transitions() == 3);
  CHECK(t[2] == 1);
  CHECK_THROWS_AS(Trajectory({0, 3}, 3), ParameterError);
  CHECK_THROWS_AS(Trajectory({-1}, 3), ParameterError);
  CHECK_THROWS_AS(Trajectory({}, 3), InsufficientDataError);
  CHECK_THROWS_AS(Trajectory({0}, 0), ParameterError);
  CHECK(Trajectory({0}, 1).transitions() == 0);
}

TEST_CASE("stochastic matrix accepts exact rows and renormalizes small drift") {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.25, 0.75;
  auto exact = StochasticMatrix::from_matrix(m);
  CHECK_FALSE(exact.renormalized());

  m(0, 0) += 1e-10;
  auto fixed = StochasticMatrix::from_matrix(m);
  CHECK(fixed.renormalized());
  CHECK(fixed.matrix().row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("stochastic matrix names the failing row") {
  Matrix m(3, 2);
  m << 0.5, 0.5, 0.9, 0.2, 1.0, 0.0;
  try {
    StochasticMatrix::from_matrix(m);
    FAIL("expected NotStochasticError");
  } catch (const NotStochasticError& e) {
    CHECK(e.row() == 1);
  }
  Matrix neg(1, 2);
  neg << 1.5, -0.5;
  CHECK_THROWS_AS(StochasticMatrix::from_matrix(neg), NotStochasticError);
}

TEST_CASE("frequency matrix needs unit mass and a square shape") {
  Matrix f(2, 2);
  f << 0.25, 0.25, 0.25, 0.25;
  auto ok = FrequencyMatrix::from_matrix(f);
  CHECK(ok.balance_violation() == doctest::Approx(0.0));
  CHECK_THROWS_AS(FrequencyMatrix::from_matrix(Matrix::Constant(2, 3, 1.0 / 6)), DimensionError);
  CHECK_THROWS_AS(FrequencyMatrix::from_matrix(Matrix::Constant(2, 2, 0.3)), InputError);
}

TEST_CASE("partition labels: membership, sizes and canonical order") {
  PartitionLabels labels({2, 0, 2, 1}, 3);
  const auto sizes = labels.block_sizes();
  CHECK(sizes == std::vector<std::size_t>{1, 1, 2});
  const Matrix z = labels.membership();
  CHECK(z.rows() == 4);
  CHECK(z.cols() == 3);
  CHECK(z(0, 2) == 1.0);
  CHECK(z.rowwise().sum().isOnes());
  const auto canon = labels.canonical();
  CHECK(std::vector<int>(canon.labels().begin(), canon.labels().end()) == std::vector<int>{0, 1, 0, 2});
  CHECK_THROWS_AS(PartitionLabels({0, 3}, 3), ParameterError);
}

TEST_CASE("seed derivation is deterministic and order-sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, {i}));
  CHECK(seen.size() == 1000);

  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
