#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ssc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using StateIndex = std::int32_t;

/// Tolerance on row sums for a matrix to count as exactly stochastic.
inline constexpr double kRowSumTolerance = 1e-12;
/// Inputs whose row sums are off by at most this much are renormalized.
inline constexpr double kRenormalizeTolerance = 1e-8;

/// An observed path X_0, ..., X_n over states {0, ..., p-1}.
///
/// Indexing is 0-based. `transitions()` is n: a trajectory of
/// length n+1 yields exactly n consecutive pairs.
class Trajectory {
 public:
  Trajectory(std::vector<StateIndex> states, std::size_t num_states);

  std::span<const StateIndex> states() const noexcept { return states_; }
  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t length() const noexcept { return states_.size(); }
  std::size_t transitions() const noexcept { return states_.empty() ? 0 : states_.size() - 1; }
  StateIndex operator[](std::size_t t) const { return states_[t]; }

  bool operator==(const Trajectory&) const = default;

 private:
  std::vector<StateIndex> states_;
  std::size_t num_states_;
};

/// Row-stochastic p x q matrix. Construction validates entries in [0,1] and
/// unit row sums.
class StochasticMatrix {
 public:
  /// Rows off by more than 1e-12 but at most `renormalize_tol` are rescaled and
  /// `renormalized()` reports it. Anything worse throws NotStochasticError.
  static StochasticMatrix from_matrix(Matrix entries,
                                      double renormalize_tol = kRenormalizeTolerance);

  const Matrix& matrix() const noexcept { return entries_; }
  Eigen::Index rows() const noexcept { return entries_.rows(); }
  Eigen::Index cols() const noexcept { return entries_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  bool renormalized() const noexcept { return renormalized_; }

 private:
  StochasticMatrix(Matrix entries, bool renormalized)
      : entries_(std::move(entries)), renormalized_(renormalized) {}

  Matrix entries_;
  bool renormalized_ = false;
};

/// Nonnegative p x p matrix of joint probabilities summing to 1.
class FrequencyMatrix {
 public:
  static FrequencyMatrix from_matrix(Matrix entries,
                                     double renormalize_tol = kRenormalizeTolerance);

  const Matrix& matrix() const noexcept { return entries_; }
  Eigen::Index rows() const noexcept { return entries_.rows(); }
  Eigen::Index cols() const noexcept { return entries_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  bool renormalized() const noexcept { return renormalized_; }

  /// max |F 1 - F^T 1|; zero for the frequency matrix of a stationary chain.
  double balance_violation() const;

 private:
  FrequencyMatrix(Matrix entries, bool renormalized)
      : entries_(std::move(entries)), renormalized_(renormalized) {}

  Matrix entries_;
  bool renormalized_ = false;
};

struct StationaryDistribution {
  Vector probs;
  double pi_min = 0.0;
  double pi_max = 0.0;

  explicit StationaryDistribution(Vector p);
  StationaryDistribution() = default;
};

/// Assignment of each of p states to one of r blocks.
class PartitionLabels {
 public:
  PartitionLabels(std::vector<int> labels, int num_blocks);

  std::span<const int> labels() const noexcept { return labels_; }
  int num_blocks() const noexcept { return num_blocks_; }
  std::size_t size() const noexcept { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::vector<std::size_t> block_sizes() const;
  /// Membership matrix Z (p x r) with Z(i, labels[i]) = 1.
  Matrix membership() const;
  /// Relabels blocks in order of first appearance.
  PartitionLabels canonical() const;

  bool operator==(const PartitionLabels&) const = default;

 private:
  std::vector<int> labels_;
  int num_blocks_;
};

}  // namespace ssc
