#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssc/error.hpp"
#include "ssc/kmeans.hpp"
#include "ssc/svd.hpp"

using namespace ssc;

namespace {

Matrix gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

void check_convention(const Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    u.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(u(arg, c) >= 0.0);
  }
}

}  // namespace

TEST_CASE("truncated svd of a diagonal matrix") {
  Matrix d = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  const auto svd = truncated_svd(d, 2);
  CHECK(svd.sigma(0) == doctest::Approx(3.0));
  CHECK(svd.sigma(1) == doctest::Approx(2.0));
  CHECK(svd.U.col(0).isApprox(Vector::Unit(3, 0)));
  CHECK(svd.U.col(1).isApprox(Vector::Unit(3, 1)));
  REQUIRE(svd.next_sigma.has_value());
  CHECK(*svd.next_sigma == doctest::Approx(1.0));
}

TEST_CASE("rank-one input is reconstructed exactly") {
  const Matrix u = gaussian(5, 1, 1);
  const Matrix v = gaussian(4, 1, 2);
  const Matrix m = u * v.transpose();
  CHECK((truncated_svd(m, 1).reconstruct() - m).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruction error matches the discarded singular values") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix m = gaussian(6, 6, seed);
    const Vector s = oracle::singular_values(m);
    const auto svd = truncated_svd(m, 3);
    const double expected = std::sqrt(s.tail(3).squaredNorm());
    CHECK((m - svd.reconstruct()).norm() == doctest::Approx(expected).epsilon(1e-10));
    CHECK((svd.U.transpose() * svd.U - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((svd.V.transpose() * svd.V - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(svd.sigma(0) >= svd.sigma(1));
    CHECK(svd.sigma(1) >= svd.sigma(2));
    check_convention(svd.U);
  }
}

TEST_CASE("randomized and dense routes agree on a low-rank matrix") {
  const Matrix m = gaussian(300, 4, 5) * gaussian(4, 250, 6) + 1e-6 * gaussian(300, 250, 7);
  const auto dense = truncated_svd(m, 4, SvdMethod::Dense);
  const auto rnd = truncated_svd(m, 4, SvdMethod::Randomized);
  CHECK((dense.sigma - rnd.sigma).cwiseAbs().maxCoeff() < 1e-8 * dense.sigma(0));
  CHECK(oracle::sin_theta_spectral(dense.U, rnd.U) < 1e-6);
  check_convention(rnd.U);
}

TEST_CASE("svd argument checks and gap flag") {
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(3, 3), 0), ParameterError);
  CHECK_THROWS_AS(truncated_svd(Matrix::Identity(3, 3), 4), ParameterError);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(truncated_svd(bad, 1), ParameterError);
  CHECK(truncated_svd(Matrix::Identity(3, 3), 1).degenerate_gap);
  CHECK_FALSE(truncated_svd(Matrix::Identity(3, 3), 3).degenerate_gap);
}

TEST_CASE("sign convention flips U and V together") {
  Matrix u(3, 1), v(2, 1);
  u << 0.1, -0.9, 0.2;
  v << 0.6, 0.8;
  apply_sign_convention(u, v);
  CHECK(u(1, 0) == doctest::Approx(0.9));
  CHECK(v(0, 0) == doctest::Approx(-0.6));
  Matrix tie(2, 1), w(1, 1);
  tie << -0.5, 0.5;
  w << 1.0;
  apply_sign_convention(tie, w);
  CHECK(tie(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("kmeans separates two distant clouds") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.3);
  Matrix pts(40, 2);
  for (int i = 0; i < 40; ++i) {
    const double c = i < 20 ? 0.0 : 10.0;
    pts(i, 0) = c + n(rng);
    pts(i, 1) = c + n(rng);
  }
  const auto res = kmeans_cluster(pts, 2);
  for (int i = 0; i < 40; ++i) CHECK(res.labels[static_cast<std::size_t>(i)] == (i < 20 ? 0 : 1));

  // No single reassignment improves the objective.
  for (int i = 0; i < 40; ++i) {
    const int own = res.labels[static_cast<std::size_t>(i)];
    const double d_own = (pts.row(i) - res.centers.row(own)).squaredNorm();
    const double d_other = (pts.row(i) - res.centers.row(1 - own)).squaredNorm();
    CHECK(d_own <= d_other);
  }
}

TEST_CASE("kmeans degenerate cases") {
  const Matrix same = Matrix::Ones(6, 3);
  const auto one = kmeans_cluster(same, 1);
  CHECK(one.inertia == doctest::Approx(0.0));
  for (std::size_t i = 0; i < 6; ++i) CHECK(one.labels[i] == 0);

  const Matrix pts = gaussian(5, 2, 3);
  const auto each = kmeans_cluster(pts, 5);
  CHECK(each.inertia == doctest::Approx(0.0));
  std::vector<int> seen(each.labels.labels().begin(), each.labels.labels().end());
  CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});

  CHECK_THROWS_AS(kmeans_cluster(pts, 6), ParameterError);
  KMeansConfig none;
  none.restarts = 0;
  CHECK_THROWS_AS(kmeans_cluster(pts, 2, none), ParameterError);
}

TEST_CASE("kmeans inertia never increases and the result is seed-deterministic") {
  const Matrix pts = gaussian(200, 3, 9);
  KMeansConfig cfg;
  cfg.seed = 77;
  const auto a = kmeans_cluster(pts, 4, cfg);
  const auto b = kmeans_cluster(pts, 4, cfg);
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  for (std::size_t i = 1; i < a.inertia_history.size(); ++i) {
    CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-12);
  }
}
