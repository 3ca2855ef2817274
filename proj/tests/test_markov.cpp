#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssc/error.hpp"
#include "ssc/markov.hpp"
#include "ssc/synth.hpp"

using namespace ssc;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

StochasticMatrix two_state() { return StochasticMatrix::from_matrix(mat2(0.9, 0.1, 0.2, 0.8)); }

}  // namespace

TEST_CASE("validate_transition") {
  auto half = validate_transition(mat2(0.5, 0.5, 0.5, 0.5));
  CHECK(half.is_stochastic);
  CHECK(half.is_ergodic_class);

  auto ident = validate_transition(Matrix::Identity(2, 2));
  CHECK(ident.is_stochastic);
  CHECK_FALSE(ident.is_ergodic_class);

  auto bad = validate_transition(mat2(0.9, 0.2, 0.2, 0.8));
  CHECK_FALSE(bad.is_stochastic);
  CHECK_FALSE(bad.is_ergodic_class);
  REQUIRE(bad.failing_row.has_value());
  CHECK(*bad.failing_row == 0);

  CHECK_THROWS_AS(validate_transition(Matrix::Constant(2, 3, 1.0 / 3)), DimensionError);
}

TEST_CASE("irreducibility is strong connectivity") {
  Matrix cycle = Matrix::Zero(3, 3);
  cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 1.0;
  CHECK(is_irreducible(cycle));
  Matrix sink = cycle;
  sink(2, 0) = 0.0;
  sink(2, 2) = 1.0;
  CHECK_FALSE(is_irreducible(sink));
}

TEST_CASE("empirical frequency, transition and distribution") {
  Trajectory alt({0, 1, 0, 1}, 2);
  Matrix f = empirical_frequency(alt).matrix();
  CHECK(f(0, 1) == doctest::Approx(2.0 / 3));
  CHECK(f(1, 0) == doctest::Approx(1.0 / 3));
  CHECK(f(0, 0) == 0.0);
  CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-15));

  Matrix rep = empirical_frequency(Trajectory({0, 0, 0}, 2)).matrix();
  CHECK(rep(0, 0) == 1.0);
  CHECK(rep.sum() == 1.0);

  Matrix pt = empirical_transition(Trajectory({0, 1, 1}, 3)).matrix();
  CHECK(pt(0, 1) == 1.0);
  CHECK(pt(1, 1) == 1.0);
  for (int j = 0; j < 3; ++j) CHECK(pt(2, j) == doctest::Approx(1.0 / 3));

  Matrix alt_p = empirical_transition(alt).matrix();
  CHECK(alt_p.isApprox(mat2(0, 1, 1, 0)));

  Vector d = empirical_distribution(alt);
  CHECK(d(0) == doctest::Approx(1.0 / 3));
  CHECK(d(1) == doctest::Approx(2.0 / 3));
  Vector zeros = empirical_distribution(Trajectory({0, 0, 0}, 3));
  CHECK(zeros(0) == 1.0);
  CHECK(zeros(1) == 0.0);

  CHECK_THROWS_AS(empirical_frequency(Trajectory({0}, 2)), InsufficientDataError);
  CHECK_THROWS_AS(empirical_transition(Trajectory({0}, 2)), InsufficientDataError);
}

TEST_CASE("long simulations converge to the known chain") {
  const auto p = two_state();
  const auto pi = stationary_distribution(p);
  const Matrix f = frequency_from_transition(p, pi.probs).matrix();
  const auto traj = simulate_trajectory(p, pi.probs, 1'000'000, 42);
  const Matrix ft = empirical_frequency(traj).matrix();
  CHECK((ft - f).cwiseAbs().maxCoeff() < 0.01);

  const auto short_run = simulate_trajectory(p, StateIndex{0}, 100'000, 3);
  CHECK((empirical_frequency(short_run).matrix() - f).cwiseAbs().sum() < 0.05);
  const Matrix pt = empirical_transition(short_run).matrix();
  CHECK(oracle::worst_row_tv(pt.row(0), p.matrix().row(0).transpose()) < 0.05);
  CHECK(oracle::worst_row_tv(pt.row(1), p.matrix().row(1).transpose()) < 0.05);
  CHECK((empirical_distribution(short_run) - pi.probs).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("stationary distribution") {
  auto half = stationary_distribution(StochasticMatrix::from_matrix(mat2(0.5, 0.5, 0.5, 0.5)));
  CHECK(half.probs(0) == doctest::Approx(0.5));
  auto two = stationary_distribution(two_state());
  CHECK(two.probs(0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(two.probs(1) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(two.pi_min == doctest::Approx(1.0 / 3));
  CHECK(two.pi_max == doctest::Approx(2.0 / 3));

  CHECK_THROWS_AS(stationary_distribution(StochasticMatrix::from_matrix(Matrix::Identity(3, 3))),
                  StructuralError);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto chain = gen_low_rank_chain(60, 3, seed);
    const Vector pi = stationary_distribution(chain.P).probs;
    CHECK((chain.P.matrix().transpose() * pi - pi).cwiseAbs().sum() < 1e-10);
    CHECK((pi - oracle::stationary(chain.P.matrix())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("stationary distribution by power iteration on a large chain") {
  const auto chain = gen_low_rank_chain(kDirectStationaryLimit + 88, 2, 9);
  const Vector pi = chain.pi.probs;
  CHECK((chain.P.matrix().transpose() * pi - pi).cwiseAbs().sum() < 1e-10);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frequency_from_transition") {
  const auto half = StochasticMatrix::from_matrix(mat2(0.5, 0.5, 0.5, 0.5));
  Vector pi(2);
  pi << 0.5, 0.5;
  CHECK(frequency_from_transition(half, pi).matrix().isApprox(Matrix::Constant(2, 2, 0.25)));

  pi << 2.0 / 3, 1.0 / 3;
  const Matrix f = frequency_from_transition(two_state(), pi).matrix();
  CHECK(f(0, 0) == doctest::Approx(0.6));
  CHECK(f(0, 1) == doctest::Approx(1.0 / 15));
  CHECK(f(1, 0) == doctest::Approx(1.0 / 15));
  CHECK(f(1, 1) == doctest::Approx(4.0 / 15));

  const auto chain = gen_low_rank_chain(40, 4, 1);
  const Matrix fc = chain.F.matrix();
  CHECK((fc.rowwise().sum() - fc.colwise().sum().transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(frequency_from_transition(two_state(), Vector::Constant(3, 1.0 / 3)), DimensionError);
}

TEST_CASE("mixing time") {
  const int p = 7;
  const auto uniform = StochasticMatrix::from_matrix(Matrix::Constant(p, p, 1.0 / p));
  CHECK(mixing_time(uniform, 0.25) == 1);
  CHECK(mixing_time(two_state(), 0.25) == 3);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = oracle::random_lazy_reversible(6, 0.9, rng);
    const auto chain = StochasticMatrix::from_matrix(m);
    for (double eps : {0.4, 0.25, 0.1, 0.01}) {
      CHECK(static_cast<int>(mixing_time(chain, eps)) == oracle::mixing_time(m, eps));
    }
    CHECK(mixing_time(chain, 0.01) >= mixing_time(chain, 0.1));
  }

  Matrix flip = mat2(0, 1, 1, 0);
  MixingTimeLimits limits;
  limits.max_steps = 1000;
  try {
    mixing_time(StochasticMatrix::from_matrix(flip), 0.25, limits);
    FAIL("periodic chain should not mix");
  } catch (const NotMixedError& e) {
    CHECK(e.last_distance() == doctest::Approx(0.5));
  }
}

TEST_CASE("eigengap bound") {
  CHECK(eigengap_mixing_bound(two_state(), 0.25) == doctest::Approx(std::log(12.0) / 0.3));
  const int p = 5;
  const auto uniform = StochasticMatrix::from_matrix(Matrix::Constant(p, p, 1.0 / p));
  CHECK(eigengap_mixing_bound(uniform, 0.25) == doctest::Approx(std::log(p / 0.25)));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto chain = StochasticMatrix::from_matrix(oracle::random_lazy_reversible(5, 0.5, rng));
    for (double eps : {0.25, 0.05}) {
      CHECK(eigengap_mixing_bound(chain, eps) >= static_cast<double>(mixing_time(chain, eps)));
    }
  }

  Matrix nonrev(3, 3);
  nonrev << 0.1, 0.8, 0.1, 0.1, 0.1, 0.8, 0.8, 0.1, 0.1;
  CHECK_THROWS_AS(eigengap_mixing_bound(StochasticMatrix::from_matrix(nonrev), 0.25),
                  ReversibilityError);
}

TEST_CASE("mixing-rate comparison across epsilon") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto chain = StochasticMatrix::from_matrix(oracle::random_lazy_reversible(5, 0.8, rng));
    for (double delta : {0.45, 0.3, 0.2}) {
      for (double eps : {delta, delta / 2, delta / 10, 1e-4}) {
        const double factor = std::ceil(std::log(eps / delta) / std::log(2 * delta)) + 1;
        CHECK(static_cast<double>(mixing_time(chain, eps)) <=
              static_cast<double>(mixing_time(chain, delta)) * factor);
      }
    }
  }
}

TEST_CASE("simulate_trajectory") {
  const auto flip = StochasticMatrix::from_matrix(mat2(0, 1, 1, 0));
  const auto t = simulate_trajectory(flip, StateIndex{0}, 3, 1);
  CHECK(std::vector<StateIndex>(t.states().begin(), t.states().end()) ==
        std::vector<StateIndex>{0, 1, 0, 1});
  CHECK(simulate_trajectory(two_state(), StateIndex{1}, 500, 9) ==
        simulate_trajectory(two_state(), StateIndex{1}, 500, 9));
  CHECK_FALSE(simulate_trajectory(two_state(), StateIndex{1}, 500, 9) ==
              simulate_trajectory(two_state(), StateIndex{1}, 500, 10));
  CHECK_THROWS_AS(simulate_trajectory(two_state(), StateIndex{2}, 5, 0), ParameterError);
}

TEST_CASE("chain diagnostics") {
  const auto chain = gen_low_rank_chain(30, 3, 4);
  const auto d = chain_diagnostics(chain.P, 3);
  CHECK(d.kappa >= 1.0);
  CHECK(d.r_tilde >= 3.0 - 1e-9);
  CHECK(d.sigma_r_plus_1 < 1e-10 * d.sigma_r);
  REQUIRE(d.tau_star.has_value());
  CHECK(*d.tau_star >= 1);
  CHECK(static_cast<int>(*d.tau_star) == oracle::mixing_time(chain.P.matrix(), 0.25));

  const auto rev = chain_diagnostics(two_state(), 1);
  REQUIRE(rev.lambda2.has_value());
  CHECK(*rev.lambda2 == doctest::Approx(0.7));
}
