#include "ssc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ssc/error.hpp"

namespace ssc {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
  }
}

void require_orthonormal(const Matrix& u, const char* which) {
  const Matrix gram = u.transpose() * u;
  const double err = (gram - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-8) {
    throw ParameterError(std::string("sin_theta: ") + which +
                         " basis is not orthonormal (max deviation " + std::to_string(err) + ")");
  }
}

/// cost(j, s) = fraction of true block j not labelled s.
Matrix block_costs(const PartitionLabels& truth, const PartitionLabels& estimate) {
  if (truth.size() != estimate.size()) {
    throw DimensionError("misclassification_rate: partitions cover " +
                         std::to_string(truth.size()) + " and " +
                         std::to_string(estimate.size()) + " states");
  }
  if (truth.num_blocks() != estimate.num_blocks()) {
    throw DimensionError("misclassification_rate: block counts differ");
  }
  const int r = truth.num_blocks();
  const auto sizes = truth.block_sizes();
  for (int j = 0; j < r; ++j) {
    if (sizes[static_cast<std::size_t>(j)] == 0) {
      throw UndefinedRateError("misclassification_rate: true block " + std::to_string(j) +
                               " is empty");
    }
  }
  Matrix overlap = Matrix::Zero(r, r);
  for (std::size_t i = 0; i < truth.size(); ++i) overlap(truth[i], estimate[i]) += 1.0;
  Matrix cost(r, r);
  for (int j = 0; j < r; ++j) {
    const auto n = static_cast<double>(sizes[static_cast<std::size_t>(j)]);
    for (int s = 0; s < r; ++s) cost(j, s) = (n - overlap(j, s)) / n;
  }
  return cost;
}

}  // namespace

double l1_matrix_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "l1_matrix_distance");
  return (a - b).cwiseAbs().sum();
}

RowDistances row_tv(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "row_tv");
  RowDistances out;
  if (a.rows() == 0) return out;
  const Vector per_row = (a - b).cwiseAbs().rowwise().sum();
  out.avg = per_row.mean();
  out.max = per_row.maxCoeff();
  return out;
}

double sin_theta(const Matrix& u_hat, const Matrix& u, SinThetaNorm norm) {
  require_same_shape(u_hat, u, "sin_theta");
  require_orthonormal(u_hat, "estimated");
  require_orthonormal(u, "reference");
  const Matrix cross = u.transpose() * u_hat;
  if (norm == SinThetaNorm::Frobenius) {
    return std::sqrt(std::max(0.0, static_cast<double>(u.cols()) - cross.squaredNorm()));
  }
  Eigen::JacobiSVD<Matrix> svd(cross);
  const double s_min = std::min(1.0, svd.singularValues().minCoeff());
  return std::sqrt(std::max(0.0, 1.0 - s_min * s_min));
}

std::vector<int> min_cost_assignment(const Matrix& cost) {
  // Hungarian algorithm with potentials (1-based internal indexing).
  const auto n = static_cast<int>(cost.rows());
  if (cost.cols() != cost.rows()) throw DimensionError("min_cost_assignment: cost must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  return assignment;
}

double misclassification_rate_bruteforce(const PartitionLabels& truth,
                                         const PartitionLabels& estimate) {
  const Matrix cost = block_costs(truth, estimate);
  const int r = truth.num_blocks();
  std::vector<int> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int j = 0; j < r; ++j) total += cost(j, perm[static_cast<std::size_t>(j)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double misclassification_rate_assignment(const PartitionLabels& truth,
                                         const PartitionLabels& estimate) {
  const Matrix cost = block_costs(truth, estimate);
  const auto assignment = min_cost_assignment(cost);
  double total = 0.0;
  for (int j = 0; j < cost.rows(); ++j) total += cost(j, assignment[static_cast<std::size_t>(j)]);
  return total;
}

double misclassification_rate(const PartitionLabels& truth, const PartitionLabels& estimate) {
  return truth.num_blocks() <= 8 ? misclassification_rate_bruteforce(truth, estimate)
                                 : misclassification_rate_assignment(truth, estimate);
}

double kl_row_divergence(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionError("kl_row_divergence: lengths differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) <= 0.0) continue;
    if (v(i) <= 0.0) return std::numeric_limits<double>::infinity();
    total += u(i) * std::log(u(i) / v(i));
  }
  return total;
}

}  // namespace ssc
