#pragma once

#include <cstdint>
#include <vector>

#include "ssc/types.hpp"

namespace ssc {

struct KMeansConfig {
  int restarts = 20;
  int max_iters = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  PartitionLabels labels;  ///< canonical: blocks numbered by first appearance
  Matrix centers;          ///< r x d, row b is the center of block b
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_history;
  int iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeding, keeping the lowest-inertia run out
/// of `restarts`. Restart i is seeded with derive_seed(seed, {i}), so the
/// result depends only on the config. Clusters that empty out take the point
/// farthest from its center within the largest cluster.
KMeansResult kmeans_cluster(const Matrix& rows, int r, const KMeansConfig& config = {});

inline PartitionLabels kmeans(const Matrix& rows, int r, const KMeansConfig& config = {}) {
  return kmeans_cluster(rows, r, config).labels;
}

}  // namespace ssc
