#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssc/markov.hpp"
#include "ssc/random.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// P = f g^T with right features g_k probability mass functions.
///
/// The kernel is C = g^T f (C_ij = g_i^T f_j), which makes
/// P^n = f C^{n-1} g^T.
struct LowRankFactorization {
  Matrix f;       ///< p x r left features
  Matrix g;       ///< p x r right features, columns nonnegative summing to 1
  Matrix kernel;  ///< r x r
};

/// P = P1 + P2 with P1 = Z Pbar diag(|block|^-1) Z^T and P2 Z = 0.
struct LumpableSplit {
  Matrix P1;
  Matrix P2;
  Matrix F1;
  Matrix F2;
  Matrix block_transition;  ///< Pbar, r x r stochastic
};

struct GroundTruthChain {
  std::string generator;
  StochasticMatrix P;
  FrequencyMatrix F;
  StationaryDistribution pi;
  int rank = 0;
  std::optional<PartitionLabels> partition;
  std::optional<LowRankFactorization> factorization;
  std::optional<LumpableSplit> lumpable;
};

/// Rows of |U0| |V0|^T normalized, U0, V0 p x r standard normal. Verifies
/// sigma_{r+1}(P) < 1e-10 sigma_r(P), redrawing up to 10 times.
GroundTruthChain gen_low_rank_chain(int p, int r, std::uint64_t seed);

/// gen_low_rank_chain, then a random half I of the states: P[I^c, I] /= delta
/// and rows renormalized. delta = 1 reproduces the low-rank chain.
GroundTruthChain gen_imbalanced_chain(int p, int r, double delta, std::uint64_t seed);

/// P = Z G: states in the same block share one random transition row.
GroundTruthChain gen_aggregatable_chain(int p, int r, std::uint64_t seed);

/// Lumpable, generally full-rank chain P = P1 + P2.
GroundTruthChain gen_lumpable_chain(int p, int r, std::uint64_t seed);

/// Uniform membership over r blocks, redrawn until every block is nonempty.
PartitionLabels random_partition(int p, int r, Rng& rng);

/// Rank <= r perturbations of the uniform kernel with uniform stationary law
/// and entries in [(1 - eta/2)/p, (1 + eta/2)/p].
std::vector<StochasticMatrix> gen_fano_transition_instances(int p, int r, double eta, int m,
                                                            std::uint64_t seed);

/// Rank-2 instances (1/p) 1 1^T + sigma u v^T with u carrying a planted
/// Rademacher pattern of amplitude zeta; sigma = delta sqrt(1 + zeta^2).
/// Requires p divisible by 4, 0 < zeta <= 1, 0 < delta <= 1/(4 sqrt 2).
std::vector<StochasticMatrix> gen_fano_subspace_instances(int p, double zeta, double delta, int m,
                                                          std::uint64_t seed);

/// f C^{n-1} g^T, the n-step transition matrix.
Matrix kernel_power(const LowRankFactorization& fact, int n);

/// Samples Z_t for each transition (X_t, X_{t+1}) = (i, j) with
/// P(Z_t = k) proportional to f_k(i) g_k(j). Needs nonnegative f and g.
std::vector<int> augment_with_latent(const LowRankFactorization& fact, const Trajectory& traj,
                                     std::uint64_t seed);

/// Builds the truth bundle (pi, F) around a transition matrix.
GroundTruthChain make_ground_truth(std::string generator, StochasticMatrix p, int rank);

}  // namespace ssc
