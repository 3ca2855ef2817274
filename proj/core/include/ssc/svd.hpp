#pragma once

#include <optional>

#include "ssc/types.hpp"

namespace ssc {

enum class SvdMethod {
  Auto,        ///< Dense below kDenseSvdLimit, randomized subspace iteration above.
  Dense,       ///< Full divide-and-conquer SVD, then truncate.
  Randomized,  ///< Block subspace iteration on an oversampled Gaussian sketch.
};

inline constexpr Eigen::Index kDenseSvdLimit = 1500;

/// Top-r singular triplets of a p x q matrix.
///
/// Sign convention: in each column of U the entry of largest magnitude is
/// nonnegative (lowest index wins ties); the matching column of V is flipped
/// with it.
struct SVDResult {
  Matrix U;      ///< p x r, orthonormal columns
  Vector sigma;  ///< r values, nonincreasing
  Matrix V;      ///< q x r, orthonormal columns
  /// sigma_{r+1}, when r < min(p, q).
  std::optional<double> next_sigma;
  /// sigma_r - sigma_{r+1} <= 1e-12: the rank-r subspace is not identifiable.
  bool degenerate_gap = false;

  Matrix reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }
};

SVDResult truncated_svd(const Matrix& m, int r, SvdMethod method = SvdMethod::Auto);

/// All singular values, nonincreasing.
Vector singular_values(const Matrix& m);

void apply_sign_convention(Matrix& u, Matrix& v);

}  // namespace ssc
