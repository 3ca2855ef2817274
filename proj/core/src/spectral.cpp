#include "ssc/spectral.hpp"

#include <string>

#include "ssc/error.hpp"
#include "ssc/markov.hpp"

namespace ssc {

namespace {

/// Normalizes each row of a nonnegative matrix, uniform 1/q for zero rows.
Matrix normalize_rows(Matrix m) {
  const auto q = static_cast<double>(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0) {
      m.row(i) /= s;
    } else {
      m.row(i).setConstant(1.0 / q);
    }
  }
  return m;
}

}  // namespace

LowRankEstimate estimate_low_rank(const FrequencyMatrix& f_tilde, int r) {
  const SVDResult svd = truncated_svd(f_tilde.matrix(), r);
  Matrix f0 = svd.reconstruct();
  Matrix positive = f0.cwiseMax(0.0);
  const double mass = positive.sum();
  if (!(mass > 0.0)) {
    throw DegenerateEstimateError("estimate_low_rank: positive part of the rank-" +
                                  std::to_string(r) + " truncation is identically zero");
  }
  positive /= mass;
  Matrix p_hat = normalize_rows(positive);
  return LowRankEstimate{FrequencyMatrix::from_matrix(std::move(positive)),
                         StochasticMatrix::from_matrix(std::move(p_hat)), std::move(f0), r,
                         svd.degenerate_gap};
}

LowRankEstimate estimate_low_rank(const Trajectory& traj, int r) {
  return estimate_low_rank(empirical_frequency(traj), r);
}

RectangularEstimate estimate_rectangular(const Matrix& g_tilde, int r) {
  const SVDResult svd = truncated_svd(g_tilde, r);
  Matrix g0 = svd.reconstruct();
  Matrix q_hat = normalize_rows(g0.cwiseMax(0.0));
  return RectangularEstimate{StochasticMatrix::from_matrix(std::move(q_hat)), g_tilde,
                             std::move(g0)};
}

RectangularEstimate estimate_rectangular(std::span<const ObservationPair> pairs, std::size_t p,
                                         std::size_t q, int r) {
  if (pairs.empty()) throw InsufficientDataError("estimate_rectangular: no observations");
  if (p == 0 || q == 0) throw ParameterError("estimate_rectangular: p and q must be positive");
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  for (const auto& [x, y] : pairs) {
    if (x < 0 || static_cast<std::size_t>(x) >= p || y < 0 || static_cast<std::size_t>(y) >= q) {
      throw ParameterError("estimate_rectangular: pair (" + std::to_string(x) + ", " +
                           std::to_string(y) + ") outside [0, p) x [0, q)");
    }
    g(x, y) += 1.0;
  }
  g /= static_cast<double>(pairs.size());
  return estimate_rectangular(g, r);
}

LeadingSubspaces leading_subspaces(const Matrix& f, const Matrix& p, int r) {
  if (f.rows() != p.rows() || f.cols() != p.cols()) {
    throw DimensionError("leading_subspaces: F and P shapes differ");
  }
  const SVDResult sf = truncated_svd(f, r);
  const SVDResult sp = truncated_svd(p, r);
  return LeadingSubspaces{
      SubspaceBasis{sf.U, Side::Left, Source::Frequency},
      SubspaceBasis{sf.V, Side::Right, Source::Frequency},
      SubspaceBasis{sp.U, Side::Left, Source::Transition},
      SubspaceBasis{sp.V, Side::Right, Source::Transition},
      sf.degenerate_gap || sp.degenerate_gap,
  };
}

LeadingSubspaces leading_subspaces(const Trajectory& traj, int r) {
  return leading_subspaces(empirical_frequency(traj).matrix(), empirical_transition(traj).matrix(),
                           r);
}

PartitionLabels spectral_state_aggregation(const Matrix& p_tilde, int r,
                                           const KMeansConfig& config) {
  const SVDResult svd = truncated_svd(p_tilde, r);
  return kmeans(svd.U, r, config);
}

PartitionLabels spectral_state_aggregation(const Trajectory& traj, int r,
                                           const KMeansConfig& config) {
  return spectral_state_aggregation(empirical_transition(traj).matrix(), r, config);
}

PartitionLabels spectral_lumpable_partition(const Matrix& f_tilde, int r,
                                            const KMeansConfig& config) {
  const SVDResult svd = truncated_svd(f_tilde, r);
  return kmeans(svd.V, r, config);
}

PartitionLabels spectral_lumpable_partition(const Trajectory& traj, int r,
                                            const KMeansConfig& config) {
  return spectral_lumpable_partition(empirical_frequency(traj).matrix(), r, config);
}

}  // namespace ssc
