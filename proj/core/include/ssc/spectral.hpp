#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "ssc/kmeans.hpp"
#include "ssc/svd.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// Output of the low-rank spectral estimator.
struct LowRankEstimate {
  FrequencyMatrix F_hat;  ///< (F0)_+ / ||(F0)_+||_1
  StochasticMatrix P_hat; ///< rows of F_hat normalized, uniform where a row is all-zero
  Matrix F0;              ///< rank-r truncation of the empirical frequency matrix
  int rank = 0;
  bool degenerate_gap = false;
};

/// Spectral estimate from an empirical frequency matrix (matrix-level entry).
LowRankEstimate estimate_low_rank(const FrequencyMatrix& f_tilde, int r);
/// Trajectory entry: builds F~ and delegates to the matrix-level entry.
LowRankEstimate estimate_low_rank(const Trajectory& traj, int r);

using ObservationPair = std::pair<StateIndex, StateIndex>;

struct RectangularEstimate {
  StochasticMatrix Q_hat;  ///< p x q
  Matrix G_tilde;          ///< empirical joint frequencies
  Matrix G_hat0;           ///< rank-r truncation of G_tilde
};

/// Low-rank estimate of Q(i, j) = P(Y = j | X = i) from observed (x, y) pairs.
RectangularEstimate estimate_rectangular(std::span<const ObservationPair> pairs, std::size_t p,
                                         std::size_t q, int r);
/// Matrix-level entry taking the empirical joint frequency matrix directly.
RectangularEstimate estimate_rectangular(const Matrix& g_tilde, int r);

enum class Side { Left, Right };
enum class Source { Frequency, Transition };

struct SubspaceBasis {
  Matrix basis;  ///< p x r, orthonormal columns
  Side side = Side::Left;
  Source source = Source::Frequency;
};

struct LeadingSubspaces {
  SubspaceBasis U_F;
  SubspaceBasis V_F;
  SubspaceBasis U_P;
  SubspaceBasis V_P;
  bool degenerate_gap = false;  ///< any of the four decompositions had sigma_r ~ sigma_{r+1}
};

/// Leading r left/right singular subspaces of F~ and P~.
LeadingSubspaces leading_subspaces(const Trajectory& traj, int r);
LeadingSubspaces leading_subspaces(const Matrix& f, const Matrix& p, int r);

/// Clusters rows of the leading left singular vectors of the transition matrix.
PartitionLabels spectral_state_aggregation(const Trajectory& traj, int r,
                                           const KMeansConfig& config = {});
PartitionLabels spectral_state_aggregation(const Matrix& p_tilde, int r,
                                           const KMeansConfig& config = {});

/// Clusters rows of the leading right singular vectors of the frequency matrix.
PartitionLabels spectral_lumpable_partition(const Trajectory& traj, int r,
                                            const KMeansConfig& config = {});
PartitionLabels spectral_lumpable_partition(const Matrix& f_tilde, int r,
                                            const KMeansConfig& config = {});

}  // namespace ssc
