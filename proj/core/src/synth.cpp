#include "ssc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ssc/error.hpp"
#include "ssc/random.hpp"
#include "ssc/svd.hpp"

namespace ssc {

namespace {

constexpr int kMaxDraws = 10;

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

Matrix abs_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = std::abs(normal(rng));
  return m;
}

/// Uniform draw from the probability simplex (normalized unit exponentials).
Vector simplex_point(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = -std::log1p(-uniform01(rng));
  return v / v.sum();
}

double rademacher(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

bool has_rank(const Matrix& m, int r) {
  const Vector sv = singular_values(m);
  if (sv(r - 1) <= 0.0) return false;
  return r >= sv.size() || sv(r) < 1e-10 * sv(r - 1);
}

}  // namespace

GroundTruthChain make_ground_truth(std::string generator, StochasticMatrix p, int rank) {
  StationaryDistribution pi = stationary_distribution(p);
  FrequencyMatrix f = frequency_from_transition(p, pi.probs);
  return GroundTruthChain{std::move(generator), std::move(p), std::move(f), std::move(pi), rank,
                          std::nullopt, std::nullopt, std::nullopt};
}

PartitionLabels random_partition(int p, int r, Rng& rng) {
  require(r >= 1 && r <= p, "random_partition: need 1 <= r <= p");
  std::vector<int> labels(static_cast<std::size_t>(p));
  while (true) {
    std::vector<int> sizes(static_cast<std::size_t>(r), 0);
    for (auto& l : labels) {
      l = static_cast<int>(rng() % static_cast<std::uint64_t>(r));
      ++sizes[static_cast<std::size_t>(l)];
    }
    if (std::find(sizes.begin(), sizes.end(), 0) == sizes.end()) break;
  }
  return PartitionLabels(std::move(labels), r);
}

GroundTruthChain gen_low_rank_chain(int p, int r, std::uint64_t seed) {
  require(r >= 1 && r <= p, "gen_low_rank_chain: need 1 <= r <= p");
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    Rng rng(derive_seed(seed, {0x10, static_cast<std::uint64_t>(attempt)}));
    const Matrix u0 = abs_normal(p, r, rng);
    const Matrix v0 = abs_normal(p, r, rng);
    const Matrix a = u0 * v0.transpose();
    const Vector row_sums = a.rowwise().sum();
    if ((row_sums.array() <= 0.0).any()) continue;
    Matrix pm = row_sums.cwiseInverse().asDiagonal() * a;
    if (!has_rank(pm, r)) continue;

    const Vector col_mass = v0.colwise().sum().transpose();
    LowRankFactorization fact;
    fact.g = v0 * col_mass.cwiseInverse().asDiagonal();
    fact.f = row_sums.cwiseInverse().asDiagonal() * u0 * col_mass.asDiagonal();
    fact.kernel = fact.g.transpose() * fact.f;

    auto truth = make_ground_truth("low_rank", StochasticMatrix::from_matrix(std::move(pm)), r);
    truth.factorization = std::move(fact);
    return truth;
  }
  throw GenerationError("gen_low_rank_chain: no rank-" + std::to_string(r) + " draw in " +
                        std::to_string(kMaxDraws) + " attempts");
}

GroundTruthChain gen_imbalanced_chain(int p, int r, double delta, std::uint64_t seed) {
  require(delta >= 1.0, "gen_imbalanced_chain: delta must be at least 1");
  GroundTruthChain base = gen_low_rank_chain(p, r, seed);
  base.generator = "imbalanced";
  if (delta == 1.0) return base;

  Rng rng(derive_seed(seed, {0x11}));
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> rare(static_cast<std::size_t>(p), 0);
  for (int k = 0; k < p / 2; ++k) rare[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;

  Matrix pm = base.P.matrix();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (rare[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (rare[static_cast<std::size_t>(j)]) pm(i, j) /= delta;
    }
    pm.row(i) /= pm.row(i).sum();
  }
  std::vector<int> labels(rare.begin(), rare.end());
  auto truth = make_ground_truth("imbalanced", StochasticMatrix::from_matrix(std::move(pm)), r);
  truth.partition = PartitionLabels(std::move(labels), 2);
  return truth;
}

GroundTruthChain gen_aggregatable_chain(int p, int r, std::uint64_t seed) {
  require(r >= 1 && r <= p, "gen_aggregatable_chain: need 1 <= r <= p");
  Rng rng(derive_seed(seed, {0x12}));
  PartitionLabels partition = random_partition(p, r, rng);
  Matrix g(r, p);
  for (int k = 0; k < r; ++k) g.row(k) = simplex_point(p, rng).transpose();
  const Matrix z = partition.membership();
  Matrix pm = z * g;

  LowRankFactorization fact{z, g.transpose(), g * z};
  auto truth = make_ground_truth("aggregatable", StochasticMatrix::from_matrix(std::move(pm)), r);
  truth.partition = std::move(partition);
  truth.factorization = std::move(fact);
  return truth;
}

GroundTruthChain gen_lumpable_chain(int p, int r, std::uint64_t seed) {
  require(r >= 1 && 2 * r <= p, "gen_lumpable_chain: need 1 <= r <= p/2");
  Rng rng(derive_seed(seed, {0x13}));
  PartitionLabels partition = random_partition(p, r, rng);
  const auto sizes = partition.block_sizes();
  const Matrix z = partition.membership();

  Matrix pbar = Matrix::Identity(r, r);
  for (int k = 0; k < r; ++k)
    for (int l = 0; l < r; ++l) pbar(k, l) += 0.5 * uniform01(rng);
  for (int k = 0; k < r; ++k) pbar.row(k) /= pbar.row(k).sum();

  Vector inv_sizes(r);
  for (int l = 0; l < r; ++l) inv_sizes(l) = 1.0 / static_cast<double>(sizes[static_cast<std::size_t>(l)]);
  const Matrix p1 = z * pbar * inv_sizes.asDiagonal() * z.transpose();

  // Centered noise, projected so each row sums to zero over every block (E Z = 0).
  Matrix e(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) e(i, j) = uniform01(rng) - 0.5;
  const Matrix block_means = e * z * inv_sizes.asDiagonal();  // p x r
  e -= block_means * z.transpose();

  // Largest scale keeping P1 + s E entrywise nonnegative.
  double scale = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (e(i, j) < 0.0) scale = std::min(scale, p1(i, j) / -e(i, j));
  if (!std::isfinite(scale)) scale = 0.0;

  Matrix pm = (p1 + scale * e).cwiseMax(0.0);
  for (Eigen::Index i = 0; i < p; ++i) pm.row(i) /= pm.row(i).sum();
  Matrix p2 = pm - p1;

  auto truth = make_ground_truth("lumpable", StochasticMatrix::from_matrix(std::move(pm)), r);
  const Matrix& pi_diag_src = truth.pi.probs;
  LumpableSplit split;
  split.F1 = pi_diag_src.asDiagonal() * p1;
  split.F2 = pi_diag_src.asDiagonal() * p2;
  split.P1 = p1;
  split.P2 = std::move(p2);
  split.block_transition = std::move(pbar);
  truth.lumpable = std::move(split);
  truth.partition = std::move(partition);
  return truth;
}

std::vector<StochasticMatrix> gen_fano_transition_instances(int p, int r, double eta, int m,
                                                            std::uint64_t seed) {
  require(eta > 0.0 && eta <= 0.5, "gen_fano_transition_instances: need 0 < eta <= 1/2");
  require(r >= 2, "gen_fano_transition_instances: need r >= 2");
  require(m >= 1, "gen_fano_transition_instances: need m >= 1");
  const int p0 = p / 2;
  const int l0 = p0 / (2 * (r - 1));
  require(l0 >= 1, "gen_fano_transition_instances: p too small for r (need p/2 >= 2(r-1))");

  Rng rng(derive_seed(seed, {0x14}));
  std::vector<StochasticMatrix> out;
  out.reserve(static_cast<std::size_t>(m));
  const double base = 1.0 / p;
  const double amp = eta / (2.0 * p);
  for (int k = 0; k < m; ++k) {
    Matrix rad(p0, r - 1);
    for (Eigen::Index i = 0; i < rad.rows(); ++i)
      for (Eigen::Index j = 0; j < rad.cols(); ++j) rad(i, j) = rademacher(rng);
    Matrix pert = Matrix::Zero(p, p);
    const int width = r - 1;
    for (int c = 0; c < l0; ++c) {
      pert.block(0, c * width, p0, width) = rad;
      pert.block(0, (l0 + c) * width, p0, width) = -rad;
      pert.block(p0, c * width, p0, width) = -rad;
      pert.block(p0, (l0 + c) * width, p0, width) = rad;
    }
    Matrix pm = Matrix::Constant(p, p, base) + amp * pert;
    out.push_back(StochasticMatrix::from_matrix(std::move(pm)));
  }
  return out;
}

std::vector<StochasticMatrix> gen_fano_subspace_instances(int p, double zeta, double delta, int m,
                                                          std::uint64_t seed) {
  require(p >= 4 && p % 4 == 0, "gen_fano_subspace_instances: p must be a positive multiple of 4");
  require(zeta > 0.0 && zeta <= 1.0, "gen_fano_subspace_instances: need 0 < zeta <= 1");
  require(delta > 0.0 && delta <= 1.0 / (4.0 * std::sqrt(2.0)),
          "gen_fano_subspace_instances: need 0 < delta <= 1/(4 sqrt 2)");
  require(m >= 1, "gen_fano_subspace_instances: need m >= 1");

  Rng rng(derive_seed(seed, {0x15}));
  const int q = p / 4;
  Vector w(p);
  w.head(p / 2).setOnes();
  w.tail(p / 2).setConstant(-1.0);
  std::vector<StochasticMatrix> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    Vector beta(q);
    for (int i = 0; i < q; ++i) beta(i) = rademacher(rng);
    Vector a(p);
    a.segment(0, q).setOnes();
    a.segment(q, q).setConstant(-1.0);
    a.segment(2 * q, q) = zeta * beta;
    a.segment(3 * q, q) = -zeta * beta;
    Matrix pm = Matrix::Constant(p, p, 1.0 / p) + (std::sqrt(2.0) * delta / p) * a * w.transpose();
    out.push_back(StochasticMatrix::from_matrix(std::move(pm)));
  }
  return out;
}

Matrix kernel_power(const LowRankFactorization& fact, int n) {
  require(n >= 1, "kernel_power: n must be at least 1");
  Matrix c = Matrix::Identity(fact.kernel.rows(), fact.kernel.cols());
  for (int k = 1; k < n; ++k) c = c * fact.kernel;
  return fact.f * c * fact.g.transpose();
}

std::vector<int> augment_with_latent(const LowRankFactorization& fact, const Trajectory& traj,
                                     std::uint64_t seed) {
  if ((fact.f.array() < 0.0).any() || (fact.g.array() < 0.0).any()) {
    throw ParameterError("augment_with_latent: factorization must be nonnegative");
  }
  if (static_cast<std::size_t>(fact.f.rows()) != traj.num_states() ||
      fact.g.rows() != fact.f.rows()) {
    throw DimensionError("augment_with_latent: factorization and trajectory disagree on p");
  }
  const Eigen::Index r = fact.f.cols();
  Rng rng(seed);
  const auto s = traj.states();
  std::vector<int> z;
  z.reserve(traj.transitions());
  Vector w(r);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    const auto i = s[t];
    const auto j = s[t + 1];
    for (Eigen::Index k = 0; k < r; ++k) w(k) = fact.f(i, k) * fact.g(j, k);
    const double total = w.sum();
    if (!(total > 0.0)) {
      throw InputError("augment_with_latent: observed transition " + std::to_string(i) + " -> " +
                       std::to_string(j) + " has zero probability under the factorization");
    }
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    int pick = static_cast<int>(r) - 1;
    for (Eigen::Index k = 0; k < r; ++k) {
      acc += w(k);
      if (u < acc && w(k) > 0.0) {
        pick = static_cast<int>(k);
        break;
      }
    }
    z.push_back(pick);
  }
  return z;
}

}  // namespace ssc
