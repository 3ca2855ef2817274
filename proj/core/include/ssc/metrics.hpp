#pragma once

#include <limits>

#include "ssc/spectral.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// Losses for one estimate. Fields that do not apply to an estimator are NaN.
struct LossReport {
  static constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();

  double l1_total = kNotApplicable;    ///< sum_ij |A_ij - B_ij| on frequency matrices
  double avg_row_tv = kNotApplicable;  ///< (1/p) sum_i ||row_i difference||_1
  double max_row_tv = kNotApplicable;  ///< max_i ||row_i difference||_1
  double sin_theta_spectral = kNotApplicable;
  double sin_theta_frobenius = kNotApplicable;
  double misclassification = kNotApplicable;
};

/// Entrywise l1 distance sum_ij |A_ij - B_ij|.
double l1_matrix_distance(const Matrix& a, const Matrix& b);

struct RowDistances {
  double avg = 0.0;
  double max = 0.0;
};

/// Per-row l1 distances (twice the total variation), averaged and maximized.
RowDistances row_tv(const Matrix& a, const Matrix& b);
inline RowDistances row_tv(const StochasticMatrix& a, const StochasticMatrix& b) {
  return row_tv(a.matrix(), b.matrix());
}

enum class SinThetaNorm { Spectral, Frobenius };

/// Principal-angle distance between the column spans of two p x r orthonormal
/// bases. Throws if either basis is not orthonormal to 1e-8.
double sin_theta(const Matrix& u_hat, const Matrix& u, SinThetaNorm norm);
inline double sin_theta(const SubspaceBasis& u_hat, const SubspaceBasis& u, SinThetaNorm norm) {
  return sin_theta(u_hat.basis, u.basis, norm);
}

/// min over block permutations s of sum_j |{i in block j : est(i) != s(j)}| / |block j|.
/// Exhaustive search for r <= 8, Hungarian assignment above.
double misclassification_rate(const PartitionLabels& truth, const PartitionLabels& estimate);
double misclassification_rate_bruteforce(const PartitionLabels& truth,
                                         const PartitionLabels& estimate);
double misclassification_rate_assignment(const PartitionLabels& truth,
                                         const PartitionLabels& estimate);

/// sum_i u_i log(u_i / v_i) with 0 log 0 = 0; +infinity when v_i = 0 < u_i.
double kl_row_divergence(const Vector& u, const Vector& v);

/// Minimum-cost perfect assignment on a square cost matrix; returns the column
/// assigned to each row.
std::vector<int> min_cost_assignment(const Matrix& cost);

}  // namespace ssc
