#include "ssc/types.hpp"

#include <cmath>
#include <string>

#include "ssc/error.hpp"

namespace ssc {

Trajectory::Trajectory(std::vector<StateIndex> states, std::size_t num_states)
    : states_(std::move(states)), num_states_(num_states) {
  if (num_states_ == 0) throw ParameterError("trajectory: state-space size must be positive");
  if (states_.empty()) throw InsufficientDataError("trajectory: at least one state is required");
  for (std::size_t t = 0; t < states_.size(); ++t) {
    const auto s = states_[t];
    if (s < 0 || static_cast<std::size_t>(s) >= num_states_) {
      throw ParameterError("trajectory: state " + std::to_string(s) + " at position " +
                           std::to_string(t) + " is outside [0, " +
                           std::to_string(num_states_) + ")");
    }
  }
}

StochasticMatrix StochasticMatrix::from_matrix(Matrix entries, double renormalize_tol) {
  if (entries.rows() == 0 || entries.cols() == 0) {
    throw DimensionError("stochastic matrix: empty matrix");
  }
  bool renormalized = false;
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw NotStochasticError(static_cast<std::size_t>(i),
                                 "row " + std::to_string(i) + ": entry " + std::to_string(j) +
                                     " = " + std::to_string(v) + " is outside [0, 1]");
      }
      sum += v;
    }
    const double err = std::abs(sum - 1.0);
    if (err > renormalize_tol) {
      throw NotStochasticError(static_cast<std::size_t>(i),
                               "row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    if (err > kRowSumTolerance) {
      entries.row(i) /= sum;
      renormalized = true;
    }
  }
  return StochasticMatrix(std::move(entries), renormalized);
}

FrequencyMatrix FrequencyMatrix::from_matrix(Matrix entries, double renormalize_tol) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw DimensionError("frequency matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries.cols(); ++j) {
      const double v = entries(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("frequency matrix: entry (" + std::to_string(i) + ", " +
                         std::to_string(j) + ") is negative or non-finite");
      }
    }
  }
  const double total = entries.sum();
  const double err = std::abs(total - 1.0);
  if (err > renormalize_tol) {
    throw InputError("frequency matrix: total mass " + std::to_string(total) + " is not 1");
  }
  bool renormalized = false;
  if (err > kRowSumTolerance) {
    entries /= total;
    renormalized = true;
  }
  return FrequencyMatrix(std::move(entries), renormalized);
}

double FrequencyMatrix::balance_violation() const {
  const Vector out = entries_.rowwise().sum();
  const Vector in = entries_.colwise().sum().transpose();
  return (out - in).cwiseAbs().maxCoeff();
}

StationaryDistribution::StationaryDistribution(Vector p) : probs(std::move(p)) {
  if (probs.size() == 0) throw DimensionError("stationary distribution: empty vector");
  pi_min = probs.minCoeff();
  pi_max = probs.maxCoeff();
}

PartitionLabels::PartitionLabels(std::vector<int> labels, int num_blocks)
    : labels_(std::move(labels)), num_blocks_(num_blocks) {
  if (num_blocks_ < 1) throw ParameterError("partition: block count must be at least 1");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_blocks_) {
      throw ParameterError("partition: label " + std::to_string(labels_[i]) + " of state " +
                           std::to_string(i) + " is outside [0, " + std::to_string(num_blocks_) +
                           ")");
    }
  }
}

std::vector<std::size_t> PartitionLabels::block_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(num_blocks_), 0);
  for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

Matrix PartitionLabels::membership() const {
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(labels_.size()), num_blocks_);
  for (std::size_t i = 0; i < labels_.size(); ++i) z(static_cast<Eigen::Index>(i), labels_[i]) = 1.0;
  return z;
}

PartitionLabels PartitionLabels::canonical() const {
  std::vector<int> remap(static_cast<std::size_t>(num_blocks_), -1);
  int next = 0;
  std::vector<int> out(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    int& m = remap[static_cast<std::size_t>(labels_[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return PartitionLabels(std::move(out), num_blocks_);
}

}  // namespace ssc
