#include "ssc/svd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssc/error.hpp"
#include "ssc/random.hpp"

namespace ssc {

namespace {

constexpr double kGapTolerance = 1e-12;

SVDResult dense_truncated(const Matrix& m, int r) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SVDResult out;
  out.U = svd.matrixU().leftCols(r);
  out.V = svd.matrixV().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  if (r < svd.singularValues().size()) out.next_sigma = svd.singularValues()(r);
  return out;
}

Matrix orthonormalize(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

SVDResult randomized_truncated(const Matrix& m, int r) {
  const Eigen::Index k_min = std::min(m.rows(), m.cols());
  const Eigen::Index width = std::min<Eigen::Index>(k_min, r + std::max(10, r));
  Rng rng(derive_seed(0x5eed, {static_cast<std::uint64_t>(m.rows()),
                               static_cast<std::uint64_t>(m.cols()),
                               static_cast<std::uint64_t>(r)}));
  std::normal_distribution<double> normal;
  Matrix omega(m.cols(), width);
  for (Eigen::Index j = 0; j < omega.cols(); ++j)
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);

  Matrix q = orthonormalize(m * omega);
  Vector prev = Vector::Zero(r);
  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Matrix z = orthonormalize(m.transpose() * q);
    q = orthonormalize(m * z);
    Eigen::JacobiSVD<Matrix> small(q.transpose() * m);
    const Vector sv = small.singularValues().head(r);
    const double change = (sv - prev).lpNorm<Eigen::Infinity>();
    prev = sv;
    if (it > 2 && change <= 1e-14 * std::max(1.0, sv(0))) break;
  }
  Eigen::JacobiSVD<Matrix> small(q.transpose() * m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SVDResult out;
  out.U = q * small.matrixU().leftCols(r);
  out.V = small.matrixV().leftCols(r);
  out.sigma = small.singularValues().head(r);
  if (r < width) out.next_sigma = small.singularValues()(r);
  return out;
}

}  // namespace

void apply_sign_convention(Matrix& u, Matrix& v) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, k) < 0.0) {
      u.col(k) = -u.col(k);
      if (k < v.cols()) v.col(k) = -v.col(k);
    }
  }
}

SVDResult truncated_svd(const Matrix& m, int r, SvdMethod method) {
  const Eigen::Index k_min = std::min(m.rows(), m.cols());
  if (r < 1 || r > k_min) {
    throw ParameterError("truncated_svd: r = " + std::to_string(r) + " outside [1, " +
                         std::to_string(k_min) + "]");
  }
  if (!m.allFinite()) throw ParameterError("truncated_svd: matrix has non-finite entries");

  if (method == SvdMethod::Auto) {
    method = k_min > kDenseSvdLimit ? SvdMethod::Randomized : SvdMethod::Dense;
  }
  SVDResult out = method == SvdMethod::Dense ? dense_truncated(m, r) : randomized_truncated(m, r);
  apply_sign_convention(out.U, out.V);
  if (out.next_sigma) out.degenerate_gap = out.sigma(r - 1) - *out.next_sigma <= kGapTolerance;
  return out;
}

Vector singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

}  // namespace ssc
